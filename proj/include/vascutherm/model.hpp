#pragma once

#include "vascutherm/error.hpp"
#include "vascutherm/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace vascutherm {

inline constexpr double kStefanBoltzmann = 5.67e-8;  // W/m^2/K^4

struct MaterialParams {
    double thickness = 0.0;                     // m
    std::vector<Eigen::Matrix2d> conductivity;  // W/m/K; one tensor, or one per triangle
    double convection_coefficient = 0.0;        // h_T, W/m^2/K
    double emissivity = 0.0;
    double stefan_boltzmann = kStefanBoltzmann;

    const Eigen::Matrix2d& conductivity_at(Index triangle) const
    {
        return conductivity.size() == 1 ? conductivity.front()
                                        : conductivity[static_cast<std::size_t>(triangle)];
    }

    static std::vector<Eigen::Matrix2d> isotropic(double k)
    {
        return {k * Eigen::Matrix2d::Identity()};
    }
};

/// chi = mdot * c_f. Throws invalid-argument for negative flow or non-positive c_f.
double heat_capacity_rate(double mass_flow_rate, double fluid_heat_capacity);

struct VasculatureFlow {
    double mass_flow_rate = 0.0;       // kg/s
    double fluid_heat_capacity = 0.0;  // J/kg/K
    double inlet_temperature = 0.0;    // K

    double heat_capacity_rate() const { return mass_flow_rate * fluid_heat_capacity; }
};

struct SourcesAndBCs {
    std::vector<double> source;                  // W/m^2, piecewise constant per triangle
    double ambient_temperature = 0.0;            // K
    std::map<Index, double> dirichlet;           // node -> K, on temperature-tagged edges
    std::vector<std::optional<double>> neumann;  // per boundary edge, outward W/m; set iff flux-tagged
};

struct ThermalProblem {
    std::shared_ptr<const Mesh> mesh;
    std::optional<VasculaturePath> path;
    MaterialParams material;
    VasculatureFlow flow;
    SourcesAndBCs loads;
    bool radiation_enabled = false;

    double heat_capacity_rate() const { return path ? flow.heat_capacity_rate() : 0.0; }
    bool radiative() const { return radiation_enabled && material.emissivity > 0.0; }
};

struct Diagnostic {
    std::string code;
    std::string message;
    std::optional<Index> index;
};

/// Every invariant violation of the problem; empty when valid. Pure.
std::vector<Diagnostic> validate(const ThermalProblem& problem);

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

/// Returns the problem unchanged, or throws ValidationError listing every violation.
const ThermalProblem& require_valid(const ThermalProblem& problem);

/// Smallest and largest conductivity eigenvalue over all triangles.
std::pair<double, double> conductivity_bounds(const MaterialParams& material);

// ---------------------------------------------------------------------------
// Rectangle setups

struct Adiabatic {
    bool operator==(const Adiabatic&) const = default;
};
struct PrescribedFlux {
    double value;  // outward, W/m
    bool operator==(const PrescribedFlux&) const = default;
};
struct PrescribedTemperature {
    double value;  // K
    bool operator==(const PrescribedTemperature&) const = default;
};
using SideCondition = std::variant<Adiabatic, PrescribedFlux, PrescribedTemperature>;

/// Indexed by Side: bottom, right, top, left.
using SideConditions = std::array<SideCondition, 4>;

/// Tags mesh edges and fills Dirichlet/Neumann data from per-side conditions.
/// A corner shared by two temperature sides takes the mean of both values.
void apply_side_conditions(Mesh& mesh, SourcesAndBCs& loads, const SideConditions& sides);

/// Per-triangle source: `value` on triangles whose centroid lies in the
/// rectangle [x0, x1] x [y0, y1] (or everywhere when no region), zero elsewhere.
struct Rect {
    double x0, y0, x1, y1;
    bool operator==(const Rect&) const = default;
};
std::vector<double> rect_source(const Mesh& mesh, double value, const std::optional<Rect>& region);

} // namespace vascutherm
