#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace golden {

// Seeded sinusoid with four injected spikes; every regression check runs on it.
inline constexpr const char* kPinnedSpec =
    "sinusoid:1000,amplitude=2,period=50,noise=0.6,seed=7,spike=200@10,spike=450@-10,spike=700@10,spike=880@10";

struct Case {
    std::string name;
    std::vector<std::string> args;  // subcommand first
};

const std::vector<Case>& cases();

using Files = std::map<std::string, std::string>;

Files read_dir(const std::filesystem::path& dir);

// Runs one CLI invocation writing into `out_dir` (recreated). Returns the exit code.
int run_into(const std::vector<std::string>& args, const std::filesystem::path& out_dir, std::string* err = nullptr);

// Empty when identical, otherwise a description of the first difference.
std::string diff(const Files& expected, const Files& actual);

// Fresh scratch directory under the system temp dir.
std::filesystem::path scratch(const std::string& tag);

}  // namespace golden
