#include "ambrosia/applications.hpp"

#include "ambrosia/error.hpp"
#include "ambrosia/metrics.hpp"

namespace ambrosia {

KinematicState double_integrate(const TimeSeries& accel, double v0, double s0) {
    if (accel.empty()) {
        throw Error("empty series");
    }
    const double dt = accel.sample_period();
    if (!(dt > 0.0)) {
        throw ValidationError("sample period must be > 0");
    }
    const std::size_t n = accel.size();
    KinematicState out;
    out.velocity.resize(n);
    out.displacement.resize(n);
    out.velocity[0] = v0;
    out.displacement[0] = s0;
    for (std::size_t i = 1; i < n; ++i) {
        out.velocity[i] = out.velocity[i - 1] + dt * (accel[i - 1].value + accel[i].value) / 2.0;
        out.displacement[i] = out.displacement[i - 1] + dt * (out.velocity[i - 1] + out.velocity[i]) / 2.0;
    }
    return out;
}

DisplacementImpact displacement_impact(const TimeSeries& accel, const ProtocolConfig& config) {
    const auto log = run_session(accel, config);
    DisplacementImpact out;
    out.delta = config.delta;
    out.data_sent_pct = 100.0 * log.sent_fraction();
    out.displacement_true = double_integrate(accel).displacement;
    out.displacement_processed = double_integrate(log.processed_series()).displacement;
    out.mse_displacement = mean_squared_error(out.displacement_true, out.displacement_processed);
    return out;
}

}  // namespace ambrosia
