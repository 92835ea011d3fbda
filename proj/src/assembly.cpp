#include "vascutherm/assembly.hpp"

#include "vascutherm/element.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace vascutherm {

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix from_triplets(Index n, const std::vector<Triplet>& triplets)
{
    SparseMatrix m(n, n);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

} // namespace

LinearOperator assemble_linear_operator(const ThermalProblem& problem)
{
    const Mesh& mesh = *problem.mesh;
    const auto& mat = problem.material;
    const auto& loads = problem.loads;
    const Index n = mesh.num_nodes();

    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(18 * mesh.num_triangles() +
                                             4 * (problem.path ? problem.path->num_segments() : 0)));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);

    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const auto xy = mesh.triangle_coords(t);
        const Eigen::Matrix3d ke = element::stiffness<double>(xy, mat.conductivity_at(t), mat.thickness) +
                                   element::convection<double>(xy, mat.convection_coefficient);
        const Eigen::Vector3d fe =
            element::load<double>(xy, loads.source[static_cast<std::size_t>(t)]) +
            element::convection_rhs<double>(xy, mat.convection_coefficient, loads.ambient_temperature);
        for (int a = 0; a < 3; ++a) {
            const Index i = mesh.triangles(t, a);
            b(i) += fe(a);
            for (int c = 0; c < 3; ++c)
                triplets.emplace_back(i, mesh.triangles(t, c), ke(a, c));
        }
    }

    if (problem.path) {
        const Eigen::Matrix2d ae = element::advection<double>(problem.heat_capacity_rate());
        const auto& seq = problem.path->node_sequence;
        for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
            const Index ids[2] = {seq[k], seq[k + 1]};
            for (int a = 0; a < 2; ++a)
                for (int c = 0; c < 2; ++c)
                    triplets.emplace_back(ids[a], ids[c], ae(a, c));
        }
    }

    // Outward flux q_p enters the weak form as -integral(w q_p), trapezoidal per edge.
    for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
        if (e >= loads.neumann.size() || !loads.neumann[e])
            continue;
        const auto [p, q] = mesh.boundary_edges[e].nodes;
        const double half = 0.5 * *loads.neumann[e] * (mesh.node(q) - mesh.node(p)).norm();
        b(p) -= half;
        b(q) -= half;
    }

    return {from_triplets(n, triplets), std::move(b)};
}

RadiationTerms assemble_radiation(const ThermalProblem& problem, const Eigen::VectorXd& theta)
{
    const Mesh& mesh = *problem.mesh;
    const auto& mat = problem.material;
    const Index n = mesh.num_nodes();
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(9 * mesh.num_triangles()));
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const auto xy = mesh.triangle_coords(t);
        Eigen::Vector3d te;
        for (int a = 0; a < 3; ++a)
            te(a) = theta(mesh.triangles(t, a));
        const auto [re, je] = element::radiation<double>(xy, mat.emissivity, mat.stefan_boltzmann,
                                                         problem.loads.ambient_temperature, te);
        for (int a = 0; a < 3; ++a) {
            const Index i = mesh.triangles(t, a);
            r(i) += re(a);
            for (int c = 0; c < 3; ++c)
                triplets.emplace_back(i, mesh.triangles(t, c), je(a, c));
        }
    }
    return {std::move(r), from_triplets(n, triplets)};
}

std::map<Index, double> constraint_map(const ThermalProblem& problem)
{
    std::map<Index, double> constraints = problem.loads.dirichlet;
    // Without flow the vasculature carries nothing and the inlet is not pinned.
    if (problem.path && problem.heat_capacity_rate() > 0.0) {
        const Index inlet = problem.path->inlet();
        const double value = problem.flow.inlet_temperature;
        auto [it, inserted] = constraints.emplace(inlet, value);
        if (!inserted && it->second != value)
            throw Error(ErrorCode::conflicting_constraint,
                        fmt::format("inlet node {} is prescribed {} K by the boundary and {} K by the inlet", inlet,
                                    it->second, value));
    }
    return constraints;
}

Eigen::VectorXd SparseSystem::expand(const Eigen::VectorXd& free_values) const
{
    Eigen::VectorXd full(static_cast<Index>(node_to_free.size()));
    for (std::size_t v = 0; v < node_to_free.size(); ++v) {
        const Index slot = node_to_free[v];
        full(static_cast<Index>(v)) = slot >= 0 ? free_values(slot) : constraint_map.at(static_cast<Index>(v));
    }
    return full;
}

Eigen::VectorXd SparseSystem::restrict(const Eigen::VectorXd& nodal) const
{
    Eigen::VectorXd out(num_free());
    for (Index k = 0; k < num_free(); ++k)
        out(k) = nodal(free_nodes[static_cast<std::size_t>(k)]);
    return out;
}

SparseSystem assemble(const ThermalProblem& problem, const std::optional<Eigen::VectorXd>& current)
{
    const Index n = problem.mesh->num_nodes();
    if (!current && problem.radiative())
        throw Error(ErrorCode::invalid_argument, "radiative assembly requires a current temperature iterate");
    if (current && current->size() != n)
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("iterate has {} entries for {} nodes", current->size(), n));

    SparseSystem sys;
    sys.constraint_map = constraint_map(problem);
    sys.node_to_free.assign(static_cast<std::size_t>(n), -1);
    for (Index v = 0; v < n; ++v)
        if (!sys.constraint_map.contains(v)) {
            sys.node_to_free[static_cast<std::size_t>(v)] = static_cast<Index>(sys.free_nodes.size());
            sys.free_nodes.push_back(v);
        }

    Eigen::VectorXd theta = current ? *current : Eigen::VectorXd::Zero(n);
    for (const auto& [v, value] : sys.constraint_map)
        theta(v) = value;

    auto op = assemble_linear_operator(problem);
    SparseMatrix jacobian = std::move(op.matrix);
    Eigen::VectorXd residual = jacobian * theta - op.load;
    if (problem.radiative()) {
        auto rad = assemble_radiation(problem, theta);
        residual += rad.residual;
        jacobian += rad.jacobian;
    }

    // rhs = J_ff theta_f - R_f; the constrained columns drop out because
    // theta already carries the prescribed values.
    const Index nf = sys.num_free();
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(jacobian.nonZeros()));
    sys.rhs = -sys.restrict(residual);
    for (Index col = 0; col < jacobian.outerSize(); ++col) {
        const Index fc = sys.node_to_free[static_cast<std::size_t>(col)];
        if (fc < 0)
            continue;
        for (SparseMatrix::InnerIterator it(jacobian, col); it; ++it) {
            const Index fr = sys.node_to_free[static_cast<std::size_t>(it.row())];
            if (fr < 0)
                continue;
            triplets.emplace_back(fr, fc, it.value());
            sys.rhs(fr) += it.value() * theta(col);
        }
    }
    sys.matrix = from_triplets(nf, triplets);
    return sys;
}

Eigen::VectorXd nodal_residual(const ThermalProblem& problem, const Eigen::VectorXd& theta)
{
    const auto op = assemble_linear_operator(problem);
    Eigen::VectorXd r = op.matrix * theta - op.load;
    if (problem.radiative())
        r += assemble_radiation(problem, theta).residual;
    return r;
}

std::vector<double> segment_peclet(const ThermalProblem& problem)
{
    std::vector<double> out;
    if (!problem.path)
        return out;
    const Mesh& mesh = *problem.mesh;
    const auto& seq = problem.path->node_sequence;

    std::vector<std::vector<Index>> incident(static_cast<std::size_t>(mesh.num_nodes()));
    for (Index t = 0; t < mesh.num_triangles(); ++t)
        for (int a = 0; a < 3; ++a)
            incident[static_cast<std::size_t>(mesh.triangles(t, a))].push_back(t);

    const double chi = problem.heat_capacity_rate();
    for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
        const Index i = seq[k], j = seq[k + 1];
        double coupling = 0.0;
        for (Index t : incident[static_cast<std::size_t>(i)]) {
            int ai = -1, aj = -1;
            for (int a = 0; a < 3; ++a) {
                if (mesh.triangles(t, a) == i) ai = a;
                if (mesh.triangles(t, a) == j) aj = a;
            }
            if (aj < 0)
                continue;
            const auto ke = element::stiffness<double>(mesh.triangle_coords(t),
                                                       problem.material.conductivity_at(t),
                                                       problem.material.thickness);
            coupling += ke(ai, aj);
        }
        out.push_back(coupling < 0.0 ? chi / -coupling
                                     : (chi > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
    }
    return out;
}

} // namespace vascutherm
