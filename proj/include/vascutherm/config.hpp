#pragma once

// Line-oriented run configuration:
//
//   # comment
//   [section]
//   key = value [unit]
//
// Units are converted to SI on ingestion; see README for the full grammar.

#include "vascutherm/error.hpp"
#include "vascutherm/model.hpp"
#include "vascutherm/solver.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vascutherm {

class ParseError : public Error {
public:
    /// line is 1-based; 0 means the error concerns the whole document.
    ParseError(int line, const std::string& message);
    int line() const noexcept { return line_; }

private:
    int line_;
};

struct RunConfig {
    // [geometry]
    double length = 0.0;  // m
    double height = 0.0;  // m
    Index nx = 0;
    Index ny = 0;

    // [vasculature]; empty means no embedded channel
    std::vector<Eigen::Vector2d> waypoints;  // m

    // [material]
    double thickness = 0.0;  // m
    Eigen::Matrix2d conductivity = Eigen::Matrix2d::Zero();  // W/m/K
    double convection_coefficient = 0.0;  // W/m^2/K
    double emissivity = 0.0;
    double stefan_boltzmann = kStefanBoltzmann;
    bool radiation = false;

    // [flow]
    double mass_flow_rate = 0.0;       // kg/s
    double fluid_heat_capacity = 0.0;  // J/kg/K
    double inlet_temperature = 0.0;    // K

    // [environment]
    double ambient_temperature = 0.0;  // K

    // [source]
    double source = 0.0;  // W/m^2
    std::optional<Rect> source_region;  // m

    // [boundary]
    SideConditions sides{Adiabatic{}, Adiabatic{}, Adiabatic{}, Adiabatic{}};

    // [solver]
    double linear_tolerance = 1e-10;
    double newton_tolerance = 1e-10;
    int max_newton_iters = 50;
    int max_halvings = 20;

    // [output], file names relative to the output directory
    std::string field_csv = "field.csv";
    std::string field_vtk = "field.vtk";
    std::string metrics_json = "metrics.json";

    SolveSettings solve_settings() const;

    bool operator==(const RunConfig&) const = default;
};

/// Throws ParseError on unknown sections or keys, malformed values, unit
/// mismatches (all with a line number) and missing required keys (listing all).
RunConfig parse_config(std::string_view text);

RunConfig load_config(const std::string& path);

/// Canonical SI text that parses back to an equal RunConfig.
std::string serialize_config(const RunConfig& config);

/// Mesh, vasculature, loads and boundary data; not yet validated.
ThermalProblem build_problem(const RunConfig& config);

} // namespace vascutherm
