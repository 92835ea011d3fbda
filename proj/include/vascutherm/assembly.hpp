#pragma once

#include "vascutherm/model.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <map>
#include <optional>
#include <vector>

namespace vascutherm {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Linear part of the discrete weak form on all nodes: residual = A theta - b.
struct LinearOperator {
    SparseMatrix matrix;  // conduction + convection + vasculature advection
    Eigen::VectorXd load;  // source + h_T theta_amb - boundary flux
};

LinearOperator assemble_linear_operator(const ThermalProblem& problem);

struct RadiationTerms {
    Eigen::VectorXd residual;
    SparseMatrix jacobian;
};

RadiationTerms assemble_radiation(const ThermalProblem& problem, const Eigen::VectorXd& theta);

/// Prescribed nodal values: Dirichlet nodes plus the inlet node when chi > 0.
/// Throws conflicting-constraint when the inlet carries a different Dirichlet value.
std::map<Index, double> constraint_map(const ThermalProblem& problem);

/// Reduced system over the free nodes. Solving matrix * x = rhs yields the
/// next iterate of the free unknowns: the exact solution for the linear model,
/// the undamped Newton iterate (matrix = Jacobian) for the radiative model.
struct SparseSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    std::map<Index, double> constraint_map;
    std::vector<Index> free_nodes;    // free slot -> node
    std::vector<Index> node_to_free;  // node -> free slot, -1 when constrained

    Index num_free() const { return static_cast<Index>(free_nodes.size()); }

    /// Full nodal vector from free values plus the constraint values.
    Eigen::VectorXd expand(const Eigen::VectorXd& free_values) const;
    Eigen::VectorXd restrict(const Eigen::VectorXd& nodal) const;
};

/// Without a current iterate the linear system is assembled (the problem must
/// not be radiative); with one, the radiative term is linearized about it.
SparseSystem assemble(const ThermalProblem& problem, const std::optional<Eigen::VectorXd>& current = std::nullopt);

/// Full nodal residual of the discrete weak form, including radiation when active.
Eigen::VectorXd nodal_residual(const ThermalProblem& problem, const Eigen::VectorXd& theta);

/// Per-segment Peclet number chi / |conduction coupling between the segment
/// nodes|; above 2 the downstream off-diagonal entry turns positive.
std::vector<double> segment_peclet(const ThermalProblem& problem);

} // namespace vascutherm
