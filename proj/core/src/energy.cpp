#include "ambrosia/energy.hpp"

#include <array>
#include <cmath>

#include "ambrosia/error.hpp"

namespace ambrosia {

namespace {

// Power figures per technology and hardware platform. Data rates: LoRa from
// the ~1 kB/s deployment link; BLE calibrated to 1500 B/s; the remaining
// three are nominal PHY rates (802.11 at 1 Mb/s, 802.15.4 at 250 kb/s,
// SIGFOX at 100 b/s).
const std::array<RadioProfile, 5> kProfiles{{
    {"802.11psm", "G2M5477", 699.6, 170.0, 66.0, 13.2, 92.9, 125000.0},
    {"ble", "nRF51822", 37.2, 42.3, 13.2, 7.8, 85.8, 1500.0},
    {"802.15.4", "SmartMeshIP", 24.11, 20.87, 4.67, 4.32, 90.6, 31250.0},
    {"lora", "GreenNet", 419.6, 44.06, std::nullopt, 4.32, 99.9, 1000.0},
    {"sigfox", "GreenNet", 147.0, 39.0, std::nullopt, 4.32, 99.9, 12.5},
}};

void check(const RadioProfile& profile, const TrafficModel& traffic) {
    if (!(profile.p_tx_mw > 0.0) || !(profile.p_sleep_uw > 0.0) || !(profile.data_rate_bytes_per_s > 0.0)) {
        throw ValidationError("radio profile powers and data rate must be > 0");
    }
    if (!(traffic.ti_s > 0.0)) {
        throw ValidationError("transmission interval must be > 0");
    }
    if (!(traffic.data_fraction >= 0.0 && traffic.data_fraction <= 1.0)) {
        throw ValidationError("data fraction must lie in [0, 1]");
    }
    if (!(traffic.battery_energy_j > 0.0) || !(traffic.payload_full_bytes >= 0.0) ||
        !(traffic.overhead_bytes >= 0.0)) {
        throw ValidationError("battery energy must be > 0; payload and overhead must be >= 0");
    }
}

}  // namespace

std::span<const RadioProfile> builtin_profiles() {
    return kProfiles;
}

const RadioProfile& find_profile(const std::string& name) {
    std::string names;
    for (const auto& p : kProfiles) {
        if (p.name == name) {
            return p;
        }
        names += names.empty() ? p.name : ", " + p.name;
    }
    throw ValidationError("unknown technology '" + name + "' (valid: " + names + ")");
}

double average_power_w(const RadioProfile& profile, const TrafficModel& traffic) {
    check(profile, traffic);
    const double bytes = traffic.data_fraction * traffic.payload_full_bytes + traffic.overhead_bytes;
    const double t_tx = bytes / profile.data_rate_bytes_per_s;
    if (t_tx > traffic.ti_s) {
        throw Error("channel saturated: transmission takes " + std::to_string(t_tx) + " s per " +
                    std::to_string(traffic.ti_s) + " s interval");
    }
    const double duty = t_tx / traffic.ti_s;
    return profile.p_tx_mw * 1e-3 * duty + profile.p_sleep_uw * 1e-6 * (1.0 - duty);
}

double lifetime_years(const RadioProfile& profile, const TrafficModel& traffic) {
    return traffic.battery_energy_j / average_power_w(profile, traffic) / kSecondsPerYear;
}

std::vector<std::pair<double, double>> lifetime_curve(const RadioProfile& profile, double ti_s,
                                                      std::span<const double> fractions, TrafficModel base) {
    bool up = true;
    bool down = true;
    for (std::size_t i = 1; i < fractions.size(); ++i) {
        up = up && fractions[i] >= fractions[i - 1];
        down = down && fractions[i] <= fractions[i - 1];
    }
    if (!up && !down) {
        throw ValidationError("fractions must be sorted (ascending or descending)");
    }
    std::vector<std::pair<double, double>> out;
    out.reserve(fractions.size());
    base.ti_s = ti_s;
    for (double f : fractions) {
        base.data_fraction = f;
        out.emplace_back(f, lifetime_years(profile, base));
    }
    return out;
}

LifetimeGain fraction_lifetime(double data_fraction, const RadioProfile& profile, double ti_s, TrafficModel base) {
    base.ti_s = ti_s;
    LifetimeGain out;
    out.data_fraction = data_fraction;
    base.data_fraction = 1.0;
    out.baseline_years = lifetime_years(profile, base);
    base.data_fraction = data_fraction;
    out.reduced_years = lifetime_years(profile, base);
    out.gain_pct = 100.0 * (out.reduced_years - out.baseline_years) / out.baseline_years;
    return out;
}

LifetimeGain session_lifetime(const TransmissionLog& log, const RadioProfile& profile, double ti_s,
                              TrafficModel base) {
    return fraction_lifetime(frame_stream(log).data_fraction(), profile, ti_s, base);
}

}  // namespace ambrosia
