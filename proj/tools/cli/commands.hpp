#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ambrosia/timeseries.hpp"

namespace ambrosia::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "AMBROSIA_OUT_DIR";

/// Runs one invocation. `args` excludes the program name. Outputs go to the
/// output directory when one is configured (files plus manifest.json),
/// otherwise the primary table is written to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses `kind:length[,key=value...]`, e.g.
/// `sinusoid:1000,amplitude=2,period=50,noise=0.6,seed=7,spike=200@10`.
/// Keys: level, slope, intercept, amplitude, period, phi, noise, seed, dt,
/// spike (INDEX@MAGNITUDE, repeatable).
SyntheticSpec parse_gen_spec(const std::string& text);

/// 64-bit FNV-1a digest rendered as "fnv1a64:<16 hex digits>".
std::string digest(std::string_view bytes);

}  // namespace ambrosia::cli
