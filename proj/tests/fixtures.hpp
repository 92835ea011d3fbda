#pragma once

// Small problem builders shared by the unit tests and the acceptance runner.

#include "vascutherm/model.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace fixtures {

using namespace vascutherm;

inline constexpr double baseline_thickness = 4.31e-3;
inline constexpr double baseline_conductivity = 0.5593;
inline constexpr double baseline_h = 13.0;
inline constexpr double baseline_emissivity = 0.95;
inline constexpr double baseline_mdot = 11.564e-3 / 60.0;  // kg/s
inline constexpr double water_cf = 4183.0;

/// Square plate with every side under the same condition and a uniform source.
inline ThermalProblem plate(double size, Index n, double f0, double ambient, const SideCondition& side = Adiabatic{})
{
    Mesh mesh = generate_rect_mesh(size, size, n, n);
    ThermalProblem p;
    apply_side_conditions(mesh, p.loads, {side, side, side, side});
    p.material.thickness = baseline_thickness;
    p.material.conductivity = MaterialParams::isotropic(baseline_conductivity);
    p.material.convection_coefficient = baseline_h;
    p.loads.ambient_temperature = ambient;
    p.loads.source = rect_source(mesh, f0, std::nullopt);
    p.mesh = std::make_shared<const Mesh>(std::move(mesh));
    return p;
}

/// Baseline surface parameters on a uniform, adiabatic, flow-free plate.
inline ThermalProblem uniform_radiative(Index n, double f0 = 500.0, double ambient = 298.15)
{
    auto p = plate(0.1, n, f0, ambient);
    p.material.emissivity = baseline_emissivity;
    p.radiation_enabled = true;
    return p;
}

/// Straight horizontal channel through the middle row.
inline void add_straight_channel(ThermalProblem& p, double mdot, double inlet)
{
    const double y = p.mesh->nodes.col(1).maxCoeff() / 2.0;
    const double x1 = p.mesh->nodes.col(0).maxCoeff();
    const std::vector<Eigen::Vector2d> w{{0.0, y}, {x1, y}};
    p.path = embed_vasculature(*p.mesh, w);
    p.flow = {mdot, water_cf, inlet};
}

} // namespace fixtures
