#pragma once

#include "vascutherm/assembly.hpp"
#include "vascutherm/model.hpp"

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace vascutherm {

struct SolveSettings {
    double linear_tolerance = 1e-10;  // relative algebraic residual
    double newton_tolerance = 1e-10;  // relative update, infinity norm
    int max_newton_iters = 50;
    int max_halvings = 20;
    // Called with (iteration, full nodal iterate) after every accepted Newton step.
    std::function<void(int, const Eigen::VectorXd&)> observer;

    /// Throws invalid-argument when a tolerance or cap is out of range.
    void check() const;
};

struct SolveInfo {
    int iterations = 0;            // 0 for a direct linear solve
    double residual_norm = 0.0;    // final 2-norm of the free-node residual
    std::vector<double> update_history;    // relative update per Newton step
    std::vector<double> residual_history;  // free residual norm, starting with the initial guess
};

struct TemperatureField {
    std::shared_ptr<const Mesh> mesh;
    Eigen::VectorXd values;  // K per node
    SolveInfo info;

    double operator[](Index node) const { return values(node); }
};

class NoConvergenceError : public Error {
public:
    NoConvergenceError(const std::string& message, std::vector<double> residual_history)
        : Error(ErrorCode::no_convergence, message), history_(std::move(residual_history)) {}

    const std::vector<double>& residual_history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

/// Direct sparse solve of the convection-only model.
TemperatureField solve_linear(const ThermalProblem& problem, const SolveSettings& settings = {});

/// Damped Newton for the radiative model. Without a guess, starts from the
/// convection-only solution clamped to be non-negative.
TemperatureField solve_radiative(const ThermalProblem& problem, const SolveSettings& settings = {},
                                 const std::optional<Eigen::VectorXd>& initial_guess = std::nullopt);

/// Newton when the problem is radiative, the linear solve otherwise.
TemperatureField solve(const ThermalProblem& problem, const SolveSettings& settings = {});

} // namespace vascutherm
