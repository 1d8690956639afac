#pragma once

// Subcommands behind the command line tool. Each writes its artifacts into the
// output directory and returns a JSON summary that also lands in meta.json.

#include <exception>
#include <functional>
#include <optional>
#include <string>

#include "lmcf/io.hpp"

namespace lmcf {

inline constexpr const char* kVersion = "1.0.0";

struct RunOptions {
    fs::path config;
    fs::path out;
    int threads = 0;                     // 0: OpenMP default
    std::optional<int> quadrature_order;
    bool verbose = false;
    std::function<void(const std::string&)> log;  // verbose progress sink
};

enum class Command { Simulate, Analyze, Density, Teardrop, Exactness };
std::string to_string(Command c);

/// Runs one subcommand; throws lmcf::Error subclasses.
json run_command(Command cmd, const RunOptions& opt);

enum class GoldenMode { Check, Update };
/// The config is a manifest listing cases {name, command, config, artifact}. Throws Mismatch.
json run_goldens(GoldenMode mode, const RunOptions& opt);

/// Manufactured teardrop series of the scenario.
std::vector<TwoPlaneField> teardrop_series(const TeardropSpec& spec, const std::vector<double>& taus, std::uint64_t seed);
std::vector<double> teardrop_taus(const TeardropSpec& spec);

/// 0 ok, 2 config, 3 numerical, 4 io.
int exit_code(const std::exception& e);

} // namespace lmcf
