#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ambrosia {

/// One-step-ahead forecaster. Implementations are deterministic: two
/// instances fed the same observations return bit-identical predictions.
/// The protocol relies on this to keep sensor and server in sync.
class Forecaster {
public:
    virtual ~Forecaster() = default;

    virtual void observe(double value) = 0;

    /// Throws Error("insufficient history") / Error("model not fitted") when
    /// called before ready().
    [[nodiscard]] virtual double predict_next() const = 0;

    [[nodiscard]] virtual bool ready() const = 0;

    /// Number of observations needed before the first prediction.
    [[nodiscard]] virtual std::size_t warmup() const = 0;

    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual std::unique_ptr<Forecaster> clone() const = 0;
};

/// Window prediction from the last w+1 values t[n-w..n]:
///   t[n+1] = t[n] + (t[n] - t[n-w]) / w
/// i.e. the current value plus the mean of the w adjacent differences.
/// `buffer` may be longer than w+1; only its last w+1 entries are used.
double window_predict(std::span<const double> buffer, std::size_t w);

class WindowForecaster final : public Forecaster {
public:
    explicit WindowForecaster(std::size_t w);

    void observe(double value) override;
    [[nodiscard]] double predict_next() const override;
    [[nodiscard]] bool ready() const override { return count_ > w_; }
    [[nodiscard]] std::size_t warmup() const override { return w_ + 1; }
    [[nodiscard]] std::string name() const override { return "window"; }
    [[nodiscard]] std::unique_ptr<Forecaster> clone() const override;

    [[nodiscard]] std::size_t window() const noexcept { return w_; }

private:
    // Value observed `lag` steps ago (lag 0 = most recent).
    [[nodiscard]] double at_lag(std::size_t lag) const;

    std::size_t w_;
    std::vector<double> ring_;  // capacity w+1
    std::size_t head_ = 0;      // next write position
    std::size_t count_ = 0;
};

struct ArFit {
    std::vector<double> coefficients;  // coefficients[k] multiplies the difference at lag k+1
    bool regularized = false;          // ridge fallback was used
    double residual_norm = 0.0;        // Euclidean norm of the in-sample residuals
};

/// Ordinary least squares fit of an AR(p) model to the first differences of
/// `history` (no intercept). Uses the normal equations with a Cholesky solve;
/// a singular normal matrix falls back to ridge regularisation with
/// lambda = 1e-8, refined by iterated Tikhonov steps so consistent systems
/// still reproduce their exact solution.
ArFit ar_fit(std::span<const double> history, std::size_t p);

/// Last value plus the predicted next difference.
double ar_predict_from(std::span<const double> history, std::span<const double> coefficients);

/// ARIMA(p, 1, 0) forecaster. Coefficients are fitted once on the first
/// `fit_window` observations; with `refit_every` > 0 they are refitted on the
/// trailing `fit_window` observations every `refit_every` samples.
class ArForecaster final : public Forecaster {
public:
    ArForecaster(std::size_t p, std::size_t fit_window, std::size_t refit_every = 0);

    void observe(double value) override;
    [[nodiscard]] double predict_next() const override;
    [[nodiscard]] bool ready() const override { return fit_.has_value(); }
    [[nodiscard]] std::size_t warmup() const override { return fit_window_; }
    [[nodiscard]] std::string name() const override { return "arima"; }
    [[nodiscard]] std::unique_ptr<Forecaster> clone() const override;

    [[nodiscard]] const std::optional<ArFit>& fit() const noexcept { return fit_; }
    [[nodiscard]] std::size_t order() const noexcept { return p_; }

private:
    void refit();

    std::size_t p_;
    std::size_t fit_window_;
    std::size_t refit_every_;
    std::vector<double> history_;  // trailing window, at most fit_window values kept
    std::size_t since_fit_ = 0;
    std::optional<ArFit> fit_;
};

enum class ForecasterKind { window, arima };

std::string to_string(ForecasterKind kind);
ForecasterKind parse_forecaster_kind(const std::string& name);

struct ForecasterConfig {
    ForecasterKind kind = ForecasterKind::window;
    std::size_t window = 5;
    std::size_t ar_order = 3;
    std::size_t fit_window = 50;
    std::size_t refit_every = 0;  // 0 = fit once

    friend bool operator==(const ForecasterConfig&, const ForecasterConfig&) = default;
};

/// Throws ValidationError for out-of-range parameters.
void validate(const ForecasterConfig& config);

std::unique_ptr<Forecaster> make_forecaster(const ForecasterConfig& config);

struct ThroughputResult {
    double seconds_per_sample = 0.0;  // median over repetitions
    double total_seconds = 0.0;       // median total
    std::vector<double> repetitions;  // per-repetition totals
};

/// Times observe+predict cycles over `stream` with a fresh forecaster per
/// repetition and reports the median.
ThroughputResult measure_throughput(const ForecasterConfig& config, std::span<const double> stream,
                                    std::size_t repetitions = 5);

}  // namespace ambrosia
