#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ambrosia/protocol.hpp"

namespace ambrosia {

inline constexpr double kSecondsPerYear = 3.156e7;

struct RadioProfile {
    std::string name;
    std::string hardware;
    double p_tx_mw = 0.0;
    double p_rx_mw = 0.0;
    std::optional<double> p_idle_mw;  // not listed for LoRa and SIGFOX
    double p_sleep_uw = 0.0;
    double transfer_share_pct = 0.0;  // share of power spent on data transfer
    double data_rate_bytes_per_s = 0.0;
};

/// The five built-in technologies: 802.11psm, ble, 802.15.4, lora, sigfox.
std::span<const RadioProfile> builtin_profiles();

/// Throws ValidationError listing the valid names when `name` is unknown.
const RadioProfile& find_profile(const std::string& name);

struct TrafficModel {
    double ti_s = 3600.0;               // transmission interval
    double payload_full_bytes = 1000.0; // bytes per interval at 100% transmission
    double data_fraction = 1.0;
    double battery_energy_j = 13500.0;  // two AAA cells
    double overhead_bytes = 0.0;        // fixed per-transmission radio overhead
};

/// Two-state (transmit, sleep) lifetime in years. Per interval the radio
/// transmits for t_tx = (fraction * payload + overhead) / rate seconds and
/// sleeps for the rest; lifetime = battery energy / average power.
/// Throws Error("channel saturated") when t_tx exceeds the interval.
double lifetime_years(const RadioProfile& profile, const TrafficModel& traffic);

/// Average power draw in watts under the same model.
double average_power_w(const RadioProfile& profile, const TrafficModel& traffic);

/// (fraction, years) pairs for one transmission interval.
std::vector<std::pair<double, double>> lifetime_curve(const RadioProfile& profile, double ti_s,
                                                      std::span<const double> fractions,
                                                      TrafficModel base = {});

struct LifetimeGain {
    double data_fraction = 1.0;
    double baseline_years = 0.0;  // 100% transmission
    double reduced_years = 0.0;
    double gain_pct = 0.0;
};

/// Applies a session's framed byte ratio to the lifetime model.
LifetimeGain session_lifetime(const TransmissionLog& log, const RadioProfile& profile, double ti_s,
                              TrafficModel base = {});

/// Same, from an explicit data fraction.
LifetimeGain fraction_lifetime(double data_fraction, const RadioProfile& profile, double ti_s,
                               TrafficModel base = {});

}  // namespace ambrosia
