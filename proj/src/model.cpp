#include "vascutherm/model.hpp"

#include <fmt/format.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace vascutherm {

double heat_capacity_rate(double mass_flow_rate, double fluid_heat_capacity)
{
    if (!(mass_flow_rate >= 0.0))
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("mass flow rate must be non-negative (got {})", mass_flow_rate));
    if (!(fluid_heat_capacity > 0.0))
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("fluid heat capacity must be positive (got {})", fluid_heat_capacity));
    return mass_flow_rate * fluid_heat_capacity;
}

namespace {

std::string summarize(const std::vector<Diagnostic>& diagnostics)
{
    std::string msg = fmt::format("problem failed validation with {} violation(s):", diagnostics.size());
    for (const auto& d : diagnostics)
        msg += fmt::format(" [{}] {};", d.code, d.message);
    return msg;
}

} // namespace

ValidationError::ValidationError(std::vector<Diagnostic> diagnostics)
    : Error(ErrorCode::validation_failed, summarize(diagnostics)), diagnostics_(std::move(diagnostics))
{
}

std::pair<double, double> conductivity_bounds(const MaterialParams& material)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& k : material.conductivity) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(k, Eigen::EigenvaluesOnly);
        lo = std::min(lo, eig.eigenvalues()(0));
        hi = std::max(hi, eig.eigenvalues()(1));
    }
    return {lo, hi};
}

std::vector<Diagnostic> validate(const ThermalProblem& problem)
{
    std::vector<Diagnostic> out;
    auto add = [&out](std::string code, std::string message, std::optional<Index> index = std::nullopt) {
        out.push_back({std::move(code), std::move(message), index});
    };

    if (!problem.mesh) {
        add("mesh-missing", "problem has no mesh");
        return out;
    }
    const Mesh& mesh = *problem.mesh;
    for (auto& defect : mesh_defects(mesh))
        add("mesh-invalid", defect);

    const auto& m = problem.material;
    if (!(m.thickness > 0.0))
        add("thickness-not-positive", fmt::format("thickness d = {} must be positive", m.thickness));
    if (!(m.convection_coefficient >= 0.0))
        add("convection-coefficient-negative",
            fmt::format("h_T = {} must be non-negative", m.convection_coefficient));
    if (!(m.emissivity >= 0.0 && m.emissivity <= 1.0))
        add("emissivity-out-of-range", fmt::format("emissivity {} outside [0, 1]", m.emissivity));
    if (!(m.stefan_boltzmann > 0.0))
        add("stefan-boltzmann-not-positive",
            fmt::format("Stefan-Boltzmann constant {} must be positive", m.stefan_boltzmann));

    const auto nk = m.conductivity.size();
    if (nk != 1 && nk != static_cast<std::size_t>(mesh.num_triangles())) {
        add("conductivity-size-mismatch",
            fmt::format("{} conductivity tensors for {} triangles", nk, mesh.num_triangles()));
    } else {
        for (std::size_t t = 0; t < nk; ++t) {
            const Eigen::Matrix2d& k = m.conductivity[t];
            if (!k.allFinite() || std::abs(k(0, 1) - k(1, 0)) > 1e-12 * k.cwiseAbs().maxCoeff()) {
                add("conductivity-not-symmetric", fmt::format("conductivity of triangle {} is not symmetric", t),
                    static_cast<Index>(t));
                continue;
            }
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(k, Eigen::EigenvaluesOnly);
            if (!(eig.eigenvalues()(0) > 0.0))
                add("conductivity-not-positive-definite",
                    fmt::format("conductivity of triangle {} has eigenvalues {} and {}", t, eig.eigenvalues()(0),
                                eig.eigenvalues()(1)),
                    static_cast<Index>(t));
        }
    }

    const auto& flow = problem.flow;
    if (problem.path && !(flow.mass_flow_rate >= 0.0))
        add("mass-flow-rate-negative", fmt::format("mass flow rate {} must be non-negative", flow.mass_flow_rate));
    if (problem.path && !(flow.fluid_heat_capacity > 0.0))
        add("fluid-heat-capacity-not-positive",
            fmt::format("fluid heat capacity {} must be positive", flow.fluid_heat_capacity));
    if (problem.path && !(flow.inlet_temperature > 0.0))
        add("inlet-temperature-not-positive",
            fmt::format("inlet temperature {} K must be positive", flow.inlet_temperature));

    const auto& loads = problem.loads;
    if (!(loads.ambient_temperature > 0.0))
        add("ambient-temperature-not-positive",
            fmt::format("ambient temperature {} K must be positive", loads.ambient_temperature));
    if (loads.source.size() != static_cast<std::size_t>(mesh.num_triangles()))
        add("source-size-mismatch",
            fmt::format("{} source values for {} triangles", loads.source.size(), mesh.num_triangles()));
    else
        for (std::size_t t = 0; t < loads.source.size(); ++t)
            if (!std::isfinite(loads.source[t]))
                add("source-not-finite", fmt::format("source on triangle {} is not finite", t),
                    static_cast<Index>(t));

    const auto& edges = mesh.boundary_edges;
    std::vector<bool> temperature_node(static_cast<std::size_t>(mesh.num_nodes()), false);
    if (loads.neumann.size() != edges.size()) {
        add("boundary-data-size-mismatch",
            fmt::format("{} flux entries for {} boundary edges", loads.neumann.size(), edges.size()));
    } else {
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const bool is_flux = edges[e].tag == BoundaryTag::flux;
            if (is_flux != loads.neumann[e].has_value())
                add("boundary-data-mismatch",
                    fmt::format("boundary edge {} is tagged {} but {} flux data", e,
                                is_flux ? "flux" : "temperature", loads.neumann[e] ? "carries" : "lacks"),
                    static_cast<Index>(e));
            else if (is_flux && !std::isfinite(*loads.neumann[e]))
                add("flux-not-finite", fmt::format("flux on boundary edge {} is not finite", e),
                    static_cast<Index>(e));
        }
    }
    for (const auto& e : edges)
        if (e.tag == BoundaryTag::temperature)
            for (Index v : e.nodes)
                if (v >= 0 && v < mesh.num_nodes())
                    temperature_node[static_cast<std::size_t>(v)] = true;
    for (Index v = 0; v < mesh.num_nodes(); ++v)
        if (temperature_node[static_cast<std::size_t>(v)] && !loads.dirichlet.contains(v))
            add("dirichlet-value-missing", fmt::format("temperature-boundary node {} has no value", v), v);
    for (const auto& [v, value] : loads.dirichlet) {
        if (v < 0 || v >= mesh.num_nodes() || !temperature_node[static_cast<std::size_t>(v)])
            add("dirichlet-off-boundary",
                fmt::format("node {} carries a prescribed temperature but no temperature edge", v), v);
        else if (!(value > 0.0))
            add("dirichlet-value-not-positive",
                fmt::format("prescribed temperature {} K at node {} must be positive", value, v), v);
    }

    if (problem.path) {
        const auto& path = *problem.path;
        const auto mask = boundary_node_mask(mesh);
        const bool in_range = !path.node_sequence.empty() &&
                              std::all_of(path.node_sequence.begin(), path.node_sequence.end(),
                                          [&](Index v) { return v >= 0 && v < mesh.num_nodes(); });
        if (!in_range)
            add("path-invalid", "vasculature path has out-of-range nodes");
        else if (!mask[static_cast<std::size_t>(path.inlet())])
            add("inlet-not-on-boundary", fmt::format("inlet node {} is interior", path.inlet()), path.inlet());
    }
    return out;
}

const ThermalProblem& require_valid(const ThermalProblem& problem)
{
    auto diagnostics = validate(problem);
    if (!diagnostics.empty())
        throw ValidationError(std::move(diagnostics));
    return problem;
}

void apply_side_conditions(Mesh& mesh, SourcesAndBCs& loads, const SideConditions& sides)
{
    loads.dirichlet.clear();
    loads.neumann.assign(mesh.boundary_edges.size(), std::nullopt);
    std::map<Index, std::pair<double, int>> sums;
    for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
        auto& edge = mesh.boundary_edges[e];
        const auto& cond = sides[static_cast<std::size_t>(edge.side)];
        if (const auto* t = std::get_if<PrescribedTemperature>(&cond)) {
            edge.tag = BoundaryTag::temperature;
            for (Index v : edge.nodes) {
                auto& [sum, count] = sums[v];
                // A node is visited once per adjacent edge; corners see both sides.
                sum += t->value;
                ++count;
            }
        } else {
            edge.tag = BoundaryTag::flux;
            const auto* q = std::get_if<PrescribedFlux>(&cond);
            loads.neumann[e] = q ? q->value : 0.0;
        }
    }
    for (const auto& [v, acc] : sums)
        loads.dirichlet[v] = acc.first / acc.second;
}

std::vector<double> rect_source(const Mesh& mesh, double value, const std::optional<Rect>& region)
{
    std::vector<double> f(static_cast<std::size_t>(mesh.num_triangles()), 0.0);
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const Eigen::Vector2d c = mesh.triangle_coords(t).rowwise().mean();
        const bool inside = !region || (c.x() >= region->x0 && c.x() <= region->x1 && c.y() >= region->y0 &&
                                        c.y() <= region->y1);
        if (inside)
            f[static_cast<std::size_t>(t)] = value;
    }
    return f;
}

} // namespace vascutherm
