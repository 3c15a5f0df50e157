#include "ambrosia/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ambrosia/error.hpp"

namespace ambrosia {

double mean_squared_error(std::span<const double> reference, std::span<const double> estimate) {
    if (reference.size() != estimate.size()) {
        throw Error("length mismatch in mean_squared_error");
    }
    if (reference.empty()) {
        throw Error("mean_squared_error of empty sequences");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double e = reference[i] - estimate[i];
        sum += e * e;
    }
    return sum / static_cast<double>(reference.size());
}

double population_variance(std::span<const double> values) {
    if (values.empty()) {
        throw Error("variance of empty sequence");
    }
    double mean = 0.0;
    for (double v : values) {
        mean += v;
    }
    mean /= static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) {
        sum += (v - mean) * (v - mean);
    }
    return sum / static_cast<double>(values.size());
}

std::optional<double> normalized_mse(std::span<const double> reference, std::span<const double> estimate) {
    const double mse = mean_squared_error(reference, estimate);
    const double var = population_variance(reference);
    if (var == 0.0) {
        return std::nullopt;
    }
    return mse / var;
}

SessionMetrics compute_metrics(const TransmissionLog& log) {
    if (log.records.empty()) {
        throw Error("cannot compute metrics of an empty session");
    }
    const auto truth = log.true_values();
    const auto processed = log.processed_values();

    SessionMetrics m;
    m.n = log.records.size();
    m.sent = log.samples_sent;
    m.data_sent_pct = 100.0 * static_cast<double>(m.sent) / static_cast<double>(m.n);
    m.mse = mean_squared_error(truth, processed);
    m.nmse = normalized_mse(truth, processed);
    for (std::size_t i = log.bootstrap; i < m.n; ++i) {
        m.max_abs_error = std::max(m.max_abs_error, std::abs(truth[i] - processed[i]));
    }
    return m;
}

std::vector<SweepRow> sweep(const TimeSeries& series, std::span<const double> deltas,
                            std::span<const ProtocolConfig> configs) {
    if (deltas.empty()) {
        throw ValidationError("deltas must be non-empty");
    }
    if (configs.empty()) {
        throw ValidationError("at least one forecaster configuration is required");
    }
    for (std::size_t i = 1; i < deltas.size(); ++i) {
        if (!(deltas[i] > deltas[i - 1])) {
            throw ValidationError("deltas must be ascending");
        }
    }
    std::vector<SweepRow> rows;
    rows.reserve(deltas.size());
    for (double delta : deltas) {
        SweepRow row{delta, {}};
        for (auto config : configs) {
            config.delta = delta;
            const auto log = run_session(series, config);
            row.cells.push_back(SweepCell{to_string(config.forecaster.kind), compute_metrics(log)});
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << "delta,forecaster,data_sent_pct,mse,nmse,max_abs_error\n";
    for (const auto& row : rows) {
        for (const auto& cell : row.cells) {
            const auto& m = cell.metrics;
            out << format_double(row.delta) << ',' << cell.forecaster << ',' << format_double(m.data_sent_pct)
                << ',' << format_double(m.mse) << ',' << (m.nmse ? format_double(*m.nmse) : std::string{})
                << ',' << format_double(m.max_abs_error) << '\n';
        }
    }
}

}  // namespace ambrosia
