#pragma once

#include <vector>

#include "ambrosia/protocol.hpp"
#include "ambrosia/timeseries.hpp"

namespace ambrosia {

struct KinematicState {
    std::vector<double> velocity;      // m/s
    std::vector<double> displacement;  // m
};

/// Trapezoidal rule applied twice with step dt = sample period:
///   v[i] = v[i-1] + dt (a[i-1] + a[i]) / 2
///   s[i] = s[i-1] + dt (v[i-1] + v[i]) / 2
/// with v[0] = v0 and s[0] = s0.
KinematicState double_integrate(const TimeSeries& accel, double v0 = 0.0, double s0 = 0.0);

struct DisplacementImpact {
    double delta = 0.0;
    double data_sent_pct = 0.0;
    double mse_displacement = 0.0;  // raw MSE between displacement curves, m^2
    std::vector<double> displacement_true;
    std::vector<double> displacement_processed;
};

/// Runs the protocol on an acceleration stream and compares the displacement
/// obtained from the true samples with the one obtained from the processed
/// samples. Initial conditions are zero for both.
DisplacementImpact displacement_impact(const TimeSeries& accel, const ProtocolConfig& config);

}  // namespace ambrosia
