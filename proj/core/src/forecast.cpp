#include "ambrosia/forecast.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ambrosia/error.hpp"

namespace ambrosia {

double window_predict(std::span<const double> buffer, std::size_t w) {
    if (w == 0) {
        throw ValidationError("window size must be >= 1");
    }
    if (buffer.size() < w + 1) {
        throw Error("insufficient history");
    }
    const double current = buffer[buffer.size() - 1];
    const double oldest = buffer[buffer.size() - 1 - w];
    return current + (current - oldest) / static_cast<double>(w);
}

WindowForecaster::WindowForecaster(std::size_t w) : w_(w), ring_(w + 1, 0.0) {
    if (w == 0) {
        throw ValidationError("window size must be >= 1");
    }
}

void WindowForecaster::observe(double value) {
    ring_[head_] = value;
    head_ = head_ + 1 == ring_.size() ? 0 : head_ + 1;
    ++count_;
}

double WindowForecaster::at_lag(std::size_t lag) const {
    const std::size_t cap = ring_.size();
    return ring_[(head_ + cap - 1 - lag) % cap];
}

double WindowForecaster::predict_next() const {
    if (!ready()) {
        throw Error("insufficient history");
    }
    // Same expression as window_predict so both paths agree bit-for-bit.
    const double current = at_lag(0);
    const double oldest = at_lag(w_);
    return current + (current - oldest) / static_cast<double>(w_);
}

std::unique_ptr<Forecaster> WindowForecaster::clone() const {
    return std::make_unique<WindowForecaster>(*this);
}

namespace {

constexpr double kRidgeLambda = 1e-8;
constexpr int kTikhonovRefinements = 4;

// In-place Cholesky of a symmetric n x n row-major matrix. Returns false when
// a pivot is not safely positive.
bool cholesky(std::vector<double>& a, std::size_t n) {
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        scale = std::max(scale, std::abs(a[i * n + i]));
    }
    const double tol = 1e-12 * scale;
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) {
            d -= a[j * n + k] * a[j * n + k];
        }
        if (!(d > tol) || scale == 0.0) {
            return false;
        }
        const double l = std::sqrt(d);
        a[j * n + j] = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / l;
        }
    }
    return true;
}

std::vector<double> cholesky_solve(const std::vector<double>& l, std::size_t n, std::vector<double> b) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            b[i] -= l[i * n + k] * b[k];
        }
        b[i] /= l[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t k = ii + 1; k < n; ++k) {
            b[ii] -= l[k * n + ii] * b[k];
        }
        b[ii] /= l[ii * n + ii];
    }
    return b;
}

}  // namespace

ArFit ar_fit(std::span<const double> history, std::size_t p) {
    if (p == 0) {
        throw ValidationError("AR order must be >= 1");
    }
    if (history.size() < p + 3) {
        throw Error("insufficient history");
    }
    std::vector<double> diff(history.size() - 1);
    for (std::size_t i = 0; i + 1 < history.size(); ++i) {
        diff[i] = history[i + 1] - history[i];
    }

    std::vector<double> normal(p * p, 0.0);
    std::vector<double> rhs(p, 0.0);
    for (std::size_t t = p; t < diff.size(); ++t) {
        for (std::size_t i = 0; i < p; ++i) {
            const double xi = diff[t - 1 - i];
            rhs[i] += xi * diff[t];
            for (std::size_t j = 0; j <= i; ++j) {
                normal[i * p + j] += xi * diff[t - 1 - j];
            }
        }
    }
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i + 1; j < p; ++j) {
            normal[i * p + j] = normal[j * p + i];
        }
    }

    ArFit fit;
    auto factor = normal;
    if (cholesky(factor, p)) {
        fit.coefficients = cholesky_solve(factor, p, rhs);
    } else {
        fit.regularized = true;
        factor = normal;
        for (std::size_t i = 0; i < p; ++i) {
            factor[i * p + i] += kRidgeLambda;
        }
        if (!cholesky(factor, p)) {
            throw Error("AR normal equations are not solvable even with ridge regularisation");
        }
        fit.coefficients = cholesky_solve(factor, p, rhs);
        for (int it = 0; it < kTikhonovRefinements; ++it) {
            auto shifted = rhs;
            for (std::size_t i = 0; i < p; ++i) {
                shifted[i] += kRidgeLambda * fit.coefficients[i];
            }
            fit.coefficients = cholesky_solve(factor, p, std::move(shifted));
        }
    }
    for (double c : fit.coefficients) {
        if (!std::isfinite(c)) {
            throw Error("AR fit produced non-finite coefficients");
        }
    }

    double rss = 0.0;
    for (std::size_t t = p; t < diff.size(); ++t) {
        double pred = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            pred += fit.coefficients[i] * diff[t - 1 - i];
        }
        rss += (diff[t] - pred) * (diff[t] - pred);
    }
    fit.residual_norm = std::sqrt(rss);
    return fit;
}

double ar_predict_from(std::span<const double> history, std::span<const double> coefficients) {
    const std::size_t p = coefficients.size();
    if (history.size() < p + 1) {
        throw Error("insufficient history");
    }
    const std::size_t n = history.size();
    double step = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
        step += coefficients[k] * (history[n - 1 - k] - history[n - 2 - k]);
    }
    return history[n - 1] + step;
}

ArForecaster::ArForecaster(std::size_t p, std::size_t fit_window, std::size_t refit_every)
    : p_(p), fit_window_(fit_window), refit_every_(refit_every) {
    if (p == 0) {
        throw ValidationError("AR order must be >= 1");
    }
    if (fit_window < p + 3) {
        throw ValidationError("fit window must provide at least p + 2 differenced points (fit_window >= p + 3)");
    }
    history_.reserve(fit_window + 1);
}

void ArForecaster::observe(double value) {
    history_.push_back(value);
    if (history_.size() > fit_window_) {
        history_.erase(history_.begin());
    }
    if (!fit_) {
        if (history_.size() == fit_window_) {
            refit();
        }
    } else if (refit_every_ > 0 && ++since_fit_ >= refit_every_) {
        refit();
    }
}

void ArForecaster::refit() {
    fit_ = ar_fit(history_, p_);
    since_fit_ = 0;
}

double ArForecaster::predict_next() const {
    if (!fit_) {
        throw Error("model not fitted");
    }
    return ar_predict_from(history_, fit_->coefficients);
}

std::unique_ptr<Forecaster> ArForecaster::clone() const {
    return std::make_unique<ArForecaster>(*this);
}

std::string to_string(ForecasterKind kind) {
    return kind == ForecasterKind::window ? "window" : "arima";
}

ForecasterKind parse_forecaster_kind(const std::string& name) {
    if (name == "window") {
        return ForecasterKind::window;
    }
    if (name == "arima") {
        return ForecasterKind::arima;
    }
    throw ValidationError("unknown forecaster '" + name + "' (expected window or arima)");
}

void validate(const ForecasterConfig& config) {
    if (config.window < 1) {
        throw ValidationError("window must be >= 1");
    }
    if (config.kind == ForecasterKind::arima) {
        if (config.ar_order < 1) {
            throw ValidationError("AR order must be >= 1");
        }
        if (config.fit_window < config.ar_order + 3) {
            throw ValidationError("fit window must be >= AR order + 3");
        }
    }
}

std::unique_ptr<Forecaster> make_forecaster(const ForecasterConfig& config) {
    validate(config);
    switch (config.kind) {
        case ForecasterKind::window:
            return std::make_unique<WindowForecaster>(config.window);
        case ForecasterKind::arima:
            return std::make_unique<ArForecaster>(config.ar_order, config.fit_window, config.refit_every);
    }
    throw ValidationError("unknown forecaster kind");
}

ThroughputResult measure_throughput(const ForecasterConfig& config, std::span<const double> stream,
                                    std::size_t repetitions) {
    repetitions = std::max<std::size_t>(repetitions, 1);
    ThroughputResult result;
    volatile double sink = 0.0;
    for (std::size_t r = 0; r < repetitions; ++r) {
        auto forecaster = make_forecaster(config);
        double acc = 0.0;
        const auto start = std::chrono::steady_clock::now();
        for (double x : stream) {
            if (forecaster->ready()) {
                acc += forecaster->predict_next();
            }
            forecaster->observe(x);
        }
        const auto stop = std::chrono::steady_clock::now();
        sink = sink + acc;
        result.repetitions.push_back(std::chrono::duration<double>(stop - start).count());
    }
    auto sorted = result.repetitions;
    std::sort(sorted.begin(), sorted.end());
    result.total_seconds = sorted[sorted.size() / 2];
    result.seconds_per_sample =
        stream.empty() ? 0.0 : result.total_seconds / static_cast<double>(stream.size());
    return result;
}

}  // namespace ambrosia
