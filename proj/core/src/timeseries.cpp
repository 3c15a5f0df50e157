#include "ambrosia/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ambrosia/error.hpp"
#include "ambrosia/random.hpp"

namespace ambrosia {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

std::optional<double> parse_number(std::string_view field) {
    // from_chars rejects a leading '+'; accept it for friendlier input.
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
    }
    double value = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc{} || ptr != end || field.empty()) {
        return std::nullopt;
    }
    return value;
}

}  // namespace

TimeSeries::TimeSeries(std::vector<Sample> samples, double sample_period)
    : samples_(std::move(samples)), sample_period_(sample_period) {
    if (auto problem = validate(*this); !problem.empty()) {
        throw ValidationError(problem);
    }
}

TimeSeries TimeSeries::from_values(std::span<const double> values, double sample_period) {
    std::vector<Sample> samples;
    samples.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        samples.push_back(Sample{i, std::nullopt, values[i]});
    }
    return TimeSeries(std::move(samples), sample_period);
}

std::vector<double> TimeSeries::values() const {
    std::vector<double> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) {
        out.push_back(s.value);
    }
    return out;
}

bool TimeSeries::has_timestamps() const noexcept {
    return !samples_.empty() && samples_.front().timestamp.has_value();
}

std::string validate(const TimeSeries& series) {
    if (series.empty()) {
        return "empty series";
    }
    if (!(series.sample_period() > 0.0) || !std::isfinite(series.sample_period())) {
        return "sample period must be finite and > 0";
    }
    const bool timestamps = series.has_timestamps();
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        if (s.index != i) {
            return "index " + std::to_string(s.index) + " at position " + std::to_string(i) +
                   " breaks contiguity";
        }
        if (!std::isfinite(s.value)) {
            return "non-finite value at index " + std::to_string(i);
        }
        if (s.timestamp.has_value() != timestamps) {
            return "timestamps must be present on all samples or none";
        }
        if (timestamps) {
            if (!std::isfinite(*s.timestamp)) {
                return "non-finite timestamp at index " + std::to_string(i);
            }
            if (i > 0 && !(*s.timestamp > *series[i - 1].timestamp)) {
                return "timestamps not strictly increasing at index " + std::to_string(i);
            }
        }
    }
    return {};
}

TimeSeries parse_csv(std::istream& in, const std::string& value_column) {
    std::string line;
    std::size_t line_no = 0;

    std::optional<std::size_t> value_col;
    std::optional<std::size_t> time_col;
    std::size_t header_width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto header = split_fields(line);
        header_width = header.size();
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == value_column) {
                value_col = c;
            } else if (header[c] == "timestamp") {
                time_col = c;
            }
        }
        if (!value_col) {
            throw ValidationError("line " + std::to_string(line_no) + ": column '" + value_column +
                                  "' not found in header");
        }
        break;
    }
    if (!value_col) {
        throw ValidationError("empty series");
    }

    std::vector<Sample> samples;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != header_width) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header_width) + " fields, got " +
                                  std::to_string(fields.size()));
        }
        const auto value = parse_number(fields[*value_col]);
        if (!value) {
            throw ValidationError("line " + std::to_string(line_no) + ": cannot parse value '" +
                                  std::string(fields[*value_col]) + "'");
        }
        if (!std::isfinite(*value)) {
            throw ValidationError("line " + std::to_string(line_no) + ": non-finite value '" +
                                  std::string(fields[*value_col]) + "'");
        }
        Sample s{samples.size(), std::nullopt, *value};
        if (time_col) {
            const auto ts = parse_number(fields[*time_col]);
            if (!ts || !std::isfinite(*ts)) {
                throw ValidationError("line " + std::to_string(line_no) + ": cannot parse timestamp '" +
                                      std::string(fields[*time_col]) + "'");
            }
            if (!samples.empty() && !(*ts > *samples.back().timestamp)) {
                throw ValidationError("line " + std::to_string(line_no) +
                                      ": timestamps must be strictly increasing");
            }
            s.timestamp = *ts;
        }
        samples.push_back(s);
    }
    if (samples.empty()) {
        throw ValidationError("empty series");
    }

    double period = 1.0;
    if (time_col && samples.size() > 1) {
        period = (*samples.back().timestamp - *samples.front().timestamp) /
                 static_cast<double>(samples.size() - 1);
    }
    return TimeSeries(std::move(samples), period);
}

TimeSeries load_csv(const std::filesystem::path& path, const std::string& value_column) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open '" + path.string() + "'");
    }
    return parse_csv(in, value_column);
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

void write_csv(const TimeSeries& series, std::ostream& out) {
    const bool timestamps = series.has_timestamps();
    out << (timestamps ? "timestamp,value\n" : "index,value\n");
    for (const auto& s : series.samples()) {
        if (timestamps) {
            out << format_double(*s.timestamp);
        } else {
            out << s.index;
        }
        out << ',' << format_double(s.value) << '\n';
    }
}

void write_csv(const TimeSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    write_csv(series, out);
}

std::string to_string(SignalKind kind) {
    switch (kind) {
        case SignalKind::constant: return "constant";
        case SignalKind::linear: return "linear";
        case SignalKind::sinusoid: return "sinusoid";
        case SignalKind::ar1: return "ar1";
        case SignalKind::random_walk: return "random_walk";
    }
    return "unknown";
}

SignalKind parse_signal_kind(const std::string& name) {
    for (auto kind : {SignalKind::constant, SignalKind::linear, SignalKind::sinusoid, SignalKind::ar1,
                      SignalKind::random_walk}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw ValidationError("unknown signal kind '" + name +
                          "' (expected constant, linear, sinusoid, ar1, random_walk)");
}

TimeSeries generate(const SyntheticSpec& spec) {
    if (spec.length < 1) {
        throw ValidationError("synthetic length must be >= 1");
    }
    if (!(spec.noise_std >= 0.0)) {
        throw ValidationError("noise_std must be >= 0");
    }
    if (spec.kind == SignalKind::sinusoid && !(spec.period > 0.0)) {
        throw ValidationError("sinusoid period must be > 0");
    }
    for (const auto& a : spec.anomalies) {
        if (a.index >= spec.length) {
            throw ValidationError("anomaly index " + std::to_string(a.index) + " out of range [0, " +
                                  std::to_string(spec.length) + ")");
        }
    }

    Rng rng(spec.seed);
    std::vector<double> values(spec.length);
    double state = spec.level;
    for (std::size_t i = 0; i < spec.length; ++i) {
        const double x = static_cast<double>(i);
        // Draw only when needed so noise-free series stay exact.
        const double noise = spec.noise_std > 0.0 ? spec.noise_std * rng.normal() : 0.0;
        switch (spec.kind) {
            case SignalKind::constant:
                values[i] = spec.level + noise;
                break;
            case SignalKind::linear:
                values[i] = spec.intercept + spec.slope * x + noise;
                break;
            case SignalKind::sinusoid:
                values[i] = spec.level + spec.amplitude * std::sin(2.0 * std::numbers::pi * x / spec.period) + noise;
                break;
            case SignalKind::ar1:
                state = spec.phi * state + noise;
                values[i] = state;
                break;
            case SignalKind::random_walk:
                state = state + noise;
                values[i] = state;
                break;
        }
    }
    for (const auto& a : spec.anomalies) {
        values[a.index] += a.magnitude;
    }
    return TimeSeries::from_values(values, spec.sample_period);
}

}  // namespace ambrosia
