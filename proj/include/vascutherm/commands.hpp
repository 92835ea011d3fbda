#pragma once

#include "vascutherm/analysis.hpp"
#include "vascutherm/config.hpp"
#include "vascutherm/verify.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vascutherm {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int parse = 2;
inline constexpr int validation = 3;
inline constexpr int solver = 4;
inline constexpr int verification = 5;
} // namespace exit_code

int exit_code_for(ErrorCode code);

/// node id, x, y, theta; one header line.
std::string field_to_csv(const TemperatureField& field);

/// Flat key/value document; absent metrics are null. Verification reports,
/// when given, go under "verification".
std::string metrics_to_json(const MetricsReport& metrics, const std::vector<PrincipleReport>& checks = {});

/// Machine-readable error document with the exit code it maps to.
std::string error_to_json(const std::exception& error);

/// Where commands write files and report progress.
struct RunContext {
    std::filesystem::path output_dir = ".";
    std::ostream* log = nullptr;   // progress messages; null for silence
    std::ostream* warn = nullptr;  // warnings; null for silence
};

/// Largest segment Peclet number; warns through ctx when it exceeds 2.
double peclet_warning(const ThermalProblem& problem, const RunContext& ctx);

/// Solve and write the field CSV, VTK file and metrics JSON. Errors are
/// written to error.json and mapped to exit codes.
int run_solve(const RunConfig& config, const RunContext& ctx);

/// HSS temperature for the domain-average source; writes hss.json.
int run_hss(const RunConfig& config, const RunContext& ctx);

/// Runs every applicable oracle (comparison when a second config is given)
/// and writes verification.json; exit 5 when any applicable check fails.
int run_verify(const RunConfig& config, const std::optional<RunConfig>& second, const RunContext& ctx);

/// Names accepted by run_sweep.
const std::vector<std::string>& sweep_parameters();

/// One metrics row per value in sweep.csv; failed solves are marked and the
/// sweep continues. Values are SI (kg/s, K, W/m^2). Throws ParseError for an
/// unknown parameter.
int run_sweep(const RunConfig& config, const std::string& parameter, const std::vector<double>& values,
              const RunContext& ctx);

} // namespace vascutherm
