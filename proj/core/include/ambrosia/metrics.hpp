#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ambrosia/protocol.hpp"
#include "ambrosia/timeseries.hpp"

namespace ambrosia {

struct SessionMetrics {
    double data_sent_pct = 0.0;
    double mse = 0.0;
    std::optional<double> nmse;  // absent when the true series has zero variance
    double max_abs_error = 0.0;  // over indices past the bootstrap
    std::size_t n = 0;
    std::size_t sent = 0;
};

double mean_squared_error(std::span<const double> reference, std::span<const double> estimate);

/// Population variance (divides by n).
double population_variance(std::span<const double> values);

/// MSE normalised by the population variance of `reference`; nullopt when
/// that variance is zero.
std::optional<double> normalized_mse(std::span<const double> reference, std::span<const double> estimate);

SessionMetrics compute_metrics(const TransmissionLog& log);

struct SweepCell {
    std::string forecaster;
    SessionMetrics metrics;
};

struct SweepRow {
    double delta = 0.0;
    std::vector<SweepCell> cells;  // one per forecaster config, in input order
};

/// One session per (delta, config) pair; each config's own delta is replaced
/// by the row's delta. Deltas must be non-empty and strictly ascending.
std::vector<SweepRow> sweep(const TimeSeries& series, std::span<const double> deltas,
                            std::span<const ProtocolConfig> configs);

/// CSV `delta,forecaster,data_sent_pct,mse,nmse,max_abs_error`, one line per
/// cell; an absent nmse is an empty field.
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

}  // namespace ambrosia
