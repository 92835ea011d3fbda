#include "vascutherm/solver.hpp"

#include <fmt/format.h>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace vascutherm {

void SolveSettings::check() const
{
    auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in_unit(linear_tolerance))
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("linear tolerance {} must lie in (0, 1)", linear_tolerance));
    if (!in_unit(newton_tolerance))
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("Newton tolerance {} must lie in (0, 1)", newton_tolerance));
    if (max_newton_iters < 1)
        throw Error(ErrorCode::invalid_argument, "max Newton iterations must be at least 1");
    if (max_halvings < 0)
        throw Error(ErrorCode::invalid_argument, "max halvings must be non-negative");
}

namespace {

void require_coupling(const ThermalProblem& problem, const SparseSystem& sys)
{
    if (sys.constraint_map.empty() && problem.material.convection_coefficient == 0.0 && !problem.radiative())
        throw Error(ErrorCode::singular_system,
                    "pure Neumann nullspace: no prescribed temperature, no inlet and h_T = 0 leave the "
                    "field defined only up to a constant");
}

// Factorizes and solves, with a few steps of iterative refinement when the
// first residual misses the tolerance.
Eigen::VectorXd sparse_solve(const SparseMatrix& a, const Eigen::VectorXd& b, double tolerance)
{
    if (a.rows() == 0)
        return Eigen::VectorXd(0);
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success)
        throw Error(ErrorCode::singular_system, fmt::format("sparse factorization failed: {}", lu.lastErrorMessage()));
    Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite())
        throw Error(ErrorCode::singular_system, "sparse solve produced non-finite values");

    const double bnorm = std::max(b.norm(), std::numeric_limits<double>::min());
    Eigen::VectorXd r = b - a * x;
    for (int step = 0; step < 3 && r.norm() / bnorm > tolerance; ++step) {
        x += lu.solve(r);
        r = b - a * x;
    }
    if (b.norm() > 0.0 && r.norm() / bnorm > tolerance)
        throw Error(ErrorCode::singular_system,
                    fmt::format("relative residual {:.3e} exceeds {:.1e}; matrix is numerically singular",
                                r.norm() / bnorm, tolerance));
    return x;
}

double free_residual_norm(const ThermalProblem& problem, const SparseSystem& sys, const Eigen::VectorXd& theta)
{
    return sys.restrict(nodal_residual(problem, theta)).norm();
}

double relative_update(const Eigen::VectorXd& step, const Eigen::VectorXd& theta)
{
    const double scale = theta.lpNorm<Eigen::Infinity>();
    return step.lpNorm<Eigen::Infinity>() / (scale > 0.0 ? scale : 1.0);
}

} // namespace

TemperatureField solve_linear(const ThermalProblem& problem, const SolveSettings& settings)
{
    settings.check();
    require_valid(problem);
    if (problem.radiative())
        throw Error(ErrorCode::invalid_argument, "solve_linear called on a radiative problem");

    const SparseSystem sys = assemble(problem);
    require_coupling(problem, sys);
    const Eigen::VectorXd x = sparse_solve(sys.matrix, sys.rhs, settings.linear_tolerance);

    TemperatureField field{problem.mesh, sys.expand(x), {}};
    field.info.residual_norm = (sys.rhs - sys.matrix * x).norm();
    field.info.residual_history = {field.info.residual_norm};
    return field;
}

TemperatureField solve_radiative(const ThermalProblem& problem, const SolveSettings& settings,
                                 const std::optional<Eigen::VectorXd>& initial_guess)
{
    settings.check();
    require_valid(problem);
    if (!problem.radiative())
        return solve_linear(problem, settings);

    const Index n = problem.mesh->num_nodes();
    Eigen::VectorXd theta;
    if (initial_guess) {
        if (initial_guess->size() != n)
            throw Error(ErrorCode::invalid_argument,
                        fmt::format("initial guess has {} entries for {} nodes", initial_guess->size(), n));
        if (!initial_guess->allFinite() || initial_guess->minCoeff() < 0.0)
            throw Error(ErrorCode::invalid_argument, "initial guess must be finite and non-negative");
        theta = *initial_guess;
    } else {
        ThermalProblem convective = problem;
        convective.radiation_enabled = false;
        try {
            theta = solve_linear(convective, settings).values.cwiseMax(0.0);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::singular_system)
                throw;
            // Radiation alone supplies the coupling; start from ambient.
            theta = Eigen::VectorXd::Constant(n, problem.loads.ambient_temperature);
        }
    }
    for (const auto& [v, value] : constraint_map(problem))
        theta(v) = value;

    SolveInfo info;
    for (int k = 1; k <= settings.max_newton_iters; ++k) {
        const SparseSystem sys = assemble(problem, theta);
        const double r0 = free_residual_norm(problem, sys, theta);
        if (k == 1)
            info.residual_history.push_back(r0);

        const Eigen::VectorXd next = sparse_solve(sys.matrix, sys.rhs, settings.linear_tolerance);
        const Eigen::VectorXd delta = sys.expand(next) - theta;
        const double update = relative_update(delta, theta);

        double lambda = 1.0;
        std::optional<Eigen::VectorXd> fallback;  // largest non-negative step seen
        std::optional<Eigen::VectorXd> accepted;
        for (int h = 0; h <= settings.max_halvings; ++h, lambda *= 0.5) {
            Eigen::VectorXd trial = theta + lambda * delta;
            if (trial.minCoeff() < 0.0)
                continue;
            // Near the root the residual sits at roundoff and cannot decrease.
            if (update <= settings.newton_tolerance ||
                free_residual_norm(problem, sys, trial) <= (1.0 - 1e-4 * lambda) * r0) {
                accepted = std::move(trial);
                break;
            }
            if (!fallback)
                fallback = std::move(trial);
        }
        if (!accepted && !fallback)
            throw Error(ErrorCode::nonphysical_iterate,
                        fmt::format("Newton step {} leaves negative temperatures after {} halvings", k,
                                    settings.max_halvings));
        theta = accepted ? std::move(*accepted) : std::move(*fallback);

        info.iterations = k;
        info.update_history.push_back(update);
        info.residual_history.push_back(free_residual_norm(problem, sys, theta));
        if (settings.observer)
            settings.observer(k, theta);
        if (!theta.allFinite())
            throw Error(ErrorCode::nonphysical_iterate, fmt::format("Newton step {} produced non-finite values", k));
        if (update <= settings.newton_tolerance) {
            info.residual_norm = info.residual_history.back();
            return {problem.mesh, std::move(theta), std::move(info)};
        }
    }

    std::string history;
    for (double r : info.residual_history)
        history += fmt::format(" {:.3e}", r);
    throw NoConvergenceError(fmt::format("Newton did not converge in {} iterations; residual history:{}",
                                         settings.max_newton_iters, history),
                             info.residual_history);
}

TemperatureField solve(const ThermalProblem& problem, const SolveSettings& settings)
{
    return problem.radiative() ? solve_radiative(problem, settings) : solve_linear(problem, settings);
}

} // namespace vascutherm
