#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ambrosia {

struct Sample {
    std::uint64_t index = 0;
    std::optional<double> timestamp;  // seconds; absent means index * period
    double value = 0.0;

    friend bool operator==(const Sample&, const Sample&) = default;
};

/// Immutable scalar stream with contiguous indices starting at 0.
class TimeSeries {
public:
    /// Validates on construction; throws ValidationError on any violation.
    TimeSeries(std::vector<Sample> samples, double sample_period);

    /// Convenience: indices 0..n-1, no timestamps.
    static TimeSeries from_values(std::span<const double> values, double sample_period = 1.0);

    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
    [[nodiscard]] bool empty() const noexcept { return samples_.empty(); }
    [[nodiscard]] double sample_period() const noexcept { return sample_period_; }
    [[nodiscard]] const std::vector<Sample>& samples() const noexcept { return samples_; }
    [[nodiscard]] const Sample& operator[](std::size_t i) const { return samples_[i]; }
    [[nodiscard]] std::vector<double> values() const;
    [[nodiscard]] bool has_timestamps() const noexcept;

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    std::vector<Sample> samples_;
    double sample_period_;
};

/// Checks the stream invariants: non-empty, indices contiguous from 0,
/// finite values, positive period, strictly increasing timestamps when present.
/// Returns an empty string when valid, otherwise a description of the first
/// violation.
std::string validate(const TimeSeries& series);

/// Reads a CSV with a header row. Recognised columns are `timestamp` or
/// `index` plus the named value column. Errors carry the 1-based line number.
TimeSeries load_csv(const std::filesystem::path& path, const std::string& value_column = "value");
TimeSeries parse_csv(std::istream& in, const std::string& value_column = "value");

/// Writes `timestamp,value` when the series carries timestamps, otherwise
/// `index,value`. Values use the shortest round-trip representation.
void write_csv(const TimeSeries& series, std::ostream& out);
void write_csv(const TimeSeries& series, const std::filesystem::path& path);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

enum class SignalKind { constant, linear, sinusoid, ar1, random_walk };

std::string to_string(SignalKind kind);
SignalKind parse_signal_kind(const std::string& name);

struct Anomaly {
    std::size_t index = 0;
    double magnitude = 0.0;
};

/// Deterministic synthetic stream description. Which shape parameters are
/// read depends on `kind`:
///   constant     value = level
///   linear       value = intercept + slope * i
///   sinusoid     value = level + amplitude * sin(2 pi i / period)
///   ar1          x[i] = phi * x[i-1] + noise, x[-1] = level
///   random_walk  x[i] = x[i-1] + noise, x[-1] = level
/// For the first three kinds `noise_std` is additive white noise; for ar1 and
/// random_walk it is the innovation standard deviation.
struct SyntheticSpec {
    SignalKind kind = SignalKind::constant;
    std::size_t length = 1;
    double noise_std = 0.0;
    std::vector<Anomaly> anomalies;
    std::uint64_t seed = 0;

    double level = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    double amplitude = 1.0;
    double period = 50.0;  // in samples
    double phi = 0.8;
    double sample_period = 1.0;  // seconds
};

TimeSeries generate(const SyntheticSpec& spec);

}  // namespace ambrosia
