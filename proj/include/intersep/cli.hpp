#pragma once

#include <optional>
#include <string>

namespace intersep::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Process exit codes shared by every subcommand.
///   0  success (certified or honestly inconclusive)
///   1  configuration error (unreadable/invalid config, bad flags)
///   2  scientific rejection (assumptions violated or prediction discordant)
///   3  numerical failure (solver blow-up)
enum ExitCode : int {
    kOk = 0,
    kConfigError = 1,
    kRejected = 2,
    kNumericalFailure = 3,
};

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "runs";
    bool json_only = false;  // suppress CSV side outputs
};

struct PredictOptions {
    CommonOptions common;
    double t_max = 0.25;
};

struct SimulateOptions {
    CommonOptions common;
    std::string mode = "literal";  // literal | projected
    int grid = 128;
    std::optional<double> end_time;  // default 0.1
};

struct VerifyOptions {
    CommonOptions common;
    std::string mode = "literal";
    int grid = 128;
    double t_max = 0.25;
    std::optional<double> end_time;  // default 1.3 * predicted t0
};

/// Each command creates one run directory under out_dir, named
/// <UTC timestamp>_<config hash prefix>, writes its outputs there together
/// with a manifest.json, prints the directory path, and returns the exit
/// code. Report bodies are deterministic; wall-clock data lives only in the
/// manifest.
int cmd_predict(const PredictOptions& opts);
int cmd_simulate(const SimulateOptions& opts);
int cmd_verify(const VerifyOptions& opts);

/// The run-directory name for a given config content at a given time.
std::string run_directory_name(const std::string& config_text);

}  // namespace intersep::cli
