#include "vascutherm/verify.hpp"

#include "vascutherm/analysis.hpp"
#include "vascutherm/assembly.hpp"
#include "vascutherm/element.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace vascutherm {

std::string_view to_string(CheckStatus status)
{
    switch (status) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::not_applicable: return "not-applicable";
    }
    return "unknown";
}

namespace {

PrincipleReport not_applicable(std::string principle, std::string why)
{
    PrincipleReport r;
    r.principle = std::move(principle);
    r.status = CheckStatus::not_applicable;
    r.detail = std::move(why);
    return r;
}

void finish(PrincipleReport& r)
{
    r.status = r.violation <= r.tolerance ? CheckStatus::pass : CheckStatus::fail;
}

bool flux_everywhere(const ThermalProblem& problem, auto&& predicate)
{
    for (const auto& q : problem.loads.neumann)
        if (q && !predicate(*q))
            return false;
    return true;
}

} // namespace

std::vector<double> bound_constants(const ThermalProblem& problem)
{
    std::vector<double> out{problem.loads.ambient_temperature};
    if (problem.path && problem.heat_capacity_rate() > 0.0)
        out.push_back(problem.flow.inlet_temperature);
    for (const auto& [v, value] : problem.loads.dirichlet)
        out.push_back(value);
    return out;
}

double default_tolerance(const ThermalProblem& problem, const Eigen::VectorXd& values)
{
    const auto constants = bound_constants(problem);
    double lo = *std::min_element(constants.begin(), constants.end());
    double hi = *std::max_element(constants.begin(), constants.end());
    if (values.size() > 0) {
        lo = std::min(lo, values.minCoeff());
        hi = std::max(hi, values.maxCoeff());
    }
    return 1e-6 * std::max(hi - lo, 1.0);
}

PrincipleReport check_minimum_principle(const TemperatureField& field, const ThermalProblem& problem,
                                        std::optional<double> tol)
{
    const std::string name = "minimum-principle";
    const auto& f = problem.loads.source;
    if (std::any_of(f.begin(), f.end(), [](double v) { return v < 0.0; }))
        return not_applicable(name, "heat source is negative somewhere");
    if (!flux_everywhere(problem, [](double q) { return q <= 0.0; }))
        return not_applicable(name, "outward boundary flux is positive somewhere");

    PrincipleReport r;
    r.principle = name;
    const auto constants = bound_constants(problem);
    r.bound = *std::min_element(constants.begin(), constants.end());
    Index worst = 0;
    r.extreme = field.values.minCoeff(&worst);
    r.worst_node = worst;
    r.violation = std::max(0.0, r.bound - r.extreme);
    r.tolerance = tol.value_or(default_tolerance(problem, field.values));
    finish(r);
    return r;
}

PrincipleReport check_maximum_principle(const TemperatureField& field, const ThermalProblem& problem,
                                        std::optional<double> tol)
{
    const std::string name = "maximum-principle";
    const auto& f = problem.loads.source;
    if (std::any_of(f.begin(), f.end(), [](double v) { return v > 0.0; }))
        return not_applicable(name, "heat source is positive somewhere");
    if (!flux_everywhere(problem, [](double q) { return q >= 0.0; }))
        return not_applicable(name, "outward boundary flux is negative somewhere");

    PrincipleReport r;
    r.principle = name;
    const auto constants = bound_constants(problem);
    r.bound = *std::max_element(constants.begin(), constants.end());
    Index worst = 0;
    r.extreme = field.values.maxCoeff(&worst);
    r.worst_node = worst;
    r.violation = std::max(0.0, r.extreme - r.bound);
    r.tolerance = tol.value_or(default_tolerance(problem, field.values));
    finish(r);
    return r;
}

PrincipleReport check_comparison(const TemperatureField& field1, const TemperatureField& field2,
                                 const ThermalProblem& problem1, const ThermalProblem& problem2,
                                 std::optional<double> tol)
{
    const std::string name = "comparison-principle";
    if (!(*problem1.mesh == *problem2.mesh) || field1.values.size() != field2.values.size() ||
        field1.values.size() != problem1.mesh->num_nodes())
        throw Error(ErrorCode::invalid_argument, "comparison needs both problems and fields on the same mesh");

    const auto& m1 = problem1.material;
    const auto& m2 = problem2.material;
    if (problem1.path != problem2.path || problem1.heat_capacity_rate() != problem2.heat_capacity_rate())
        return not_applicable(name, "vasculature or flow differs");
    if (problem1.loads.ambient_temperature != problem2.loads.ambient_temperature)
        return not_applicable(name, "ambient temperature differs");
    if (m1.thickness != m2.thickness || m1.conductivity != m2.conductivity ||
        m1.convection_coefficient != m2.convection_coefficient || problem1.radiative() != problem2.radiative() ||
        (problem1.radiative() && (m1.emissivity != m2.emissivity || m1.stefan_boltzmann != m2.stefan_boltzmann)))
        return not_applicable(name, "material parameters differ");
    if (problem1.radiative() && (field1.values.minCoeff() < 0.0 || field2.values.minCoeff() < 0.0))
        return not_applicable(name, "radiative comparison needs non-negative fields");

    if (problem1.path && problem1.heat_capacity_rate() > 0.0 &&
        !(problem1.flow.inlet_temperature <= problem2.flow.inlet_temperature))
        return not_applicable(name, "inlet temperatures are not ordered");
    const auto& d1 = problem1.loads.dirichlet;
    const auto& d2 = problem2.loads.dirichlet;
    if (d1.size() != d2.size())
        return not_applicable(name, "prescribed-temperature boundaries differ");
    for (auto a = d1.begin(), b = d2.begin(); a != d1.end(); ++a, ++b) {
        if (a->first != b->first)
            return not_applicable(name, "prescribed-temperature boundaries differ");
        if (!(a->second <= b->second))
            return not_applicable(name, fmt::format("prescribed temperatures not ordered at node {}", a->first));
    }
    for (std::size_t t = 0; t < problem1.loads.source.size(); ++t)
        if (!(problem1.loads.source[t] <= problem2.loads.source[t]))
            return not_applicable(name, fmt::format("heat sources not ordered on triangle {}", t));
    const auto& q1 = problem1.loads.neumann;
    const auto& q2 = problem2.loads.neumann;
    if (q1.size() != q2.size())
        return not_applicable(name, "flux boundaries differ");
    for (std::size_t e = 0; e < q1.size(); ++e) {
        if (q1[e].has_value() != q2[e].has_value())
            return not_applicable(name, "flux boundaries differ");
        if (q1[e] && !(*q1[e] >= *q2[e]))
            return not_applicable(name, fmt::format("boundary fluxes not ordered on edge {}", e));
    }

    PrincipleReport r;
    r.principle = name;
    const Eigen::VectorXd excess = field1.values - field2.values;
    Index worst = 0;
    const double max_excess = excess.maxCoeff(&worst);
    r.worst_node = worst;
    r.extreme = field1.values(worst);
    r.bound = field2.values(worst);
    r.violation = std::max(0.0, max_excess);
    if (tol) {
        r.tolerance = *tol;
    } else {
        Eigen::VectorXd both(2 * excess.size());
        both << field1.values, field2.values;
        r.tolerance = std::max(default_tolerance(problem1, both), default_tolerance(problem2, both));
    }
    finish(r);
    return r;
}

ThermalProblem perturbed(const ThermalProblem& problem, const Perturbation& p)
{
    ThermalProblem out = problem;
    out.loads.ambient_temperature += p.ambient;
    out.flow.inlet_temperature += p.inlet;
    for (const auto& [v, shift] : p.boundary) {
        auto it = out.loads.dirichlet.find(v);
        if (it == out.loads.dirichlet.end())
            throw Error(ErrorCode::invalid_argument, fmt::format("node {} has no prescribed temperature to perturb", v));
        it->second += shift;
    }
    return out;
}

PrincipleReport check_stability(const ThermalProblem& problem, const Perturbation& p, double delta, double tol,
                                const SolveSettings& settings)
{
    const std::string name = "stability";
    if (problem.radiative())
        return not_applicable(name, "stability bound is established for the convection-only model");
    double largest = std::max(std::abs(p.ambient), std::abs(p.inlet));
    for (const auto& [v, shift] : p.boundary)
        largest = std::max(largest, std::abs(shift));
    if (!(delta >= 0.0) || largest > delta)
        return not_applicable(name, fmt::format("perturbation {} K exceeds delta = {} K", largest, delta));

    const auto base = solve_linear(problem, settings);
    const auto moved = solve_linear(perturbed(problem, p), settings);
    PrincipleReport r;
    r.principle = name;
    Index worst = 0;
    r.extreme = (moved.values - base.values).cwiseAbs().maxCoeff(&worst);
    r.worst_node = worst;
    r.bound = delta;
    r.tolerance = delta * tol;
    r.violation = std::max(0.0, r.extreme - delta);
    finish(r);
    return r;
}

PrincipleReport check_special_case(const TemperatureField& field, const ThermalProblem& problem,
                                   std::optional<double> tol)
{
    const std::string name = "special-case";
    const auto& f = problem.loads.source;
    if (f.empty() || std::any_of(f.begin(), f.end(), [&](double v) { return v != f.front(); }))
        return not_applicable(name, "heat source is not constant");
    if (!problem.loads.dirichlet.empty() || !flux_everywhere(problem, [](double q) { return q == 0.0; }))
        return not_applicable(name, "boundary is not adiabatic");
    const double f0 = f.front();
    if (f0 < 0.0)
        return not_applicable(name, "HSS temperature needs a non-negative source");
    const auto& mat = problem.material;
    const double eps = problem.radiative() ? mat.emissivity : 0.0;
    const double amb = problem.loads.ambient_temperature;
    const double hss = hss_temperature(f0, mat.convection_coefficient, eps, mat.stefan_boltzmann, amb);
    const double inlet = problem.flow.inlet_temperature;
    if (!(inlet <= hss))
        return not_applicable(name, fmt::format("inlet {} K is above the HSS temperature {} K", inlet, hss));

    PrincipleReport r;
    r.principle = name;
    r.tolerance = tol.value_or(1e-6 * std::max(hss - inlet, 1.0));
    double worst_excess = -std::numeric_limits<double>::infinity();
    auto consider = [&](double bound, double value, double excess, std::optional<Index> node, const char* what) {
        if (excess > worst_excess) {
            worst_excess = excess;
            r.bound = bound;
            r.extreme = value;
            r.worst_node = node;
            r.detail = what;
        }
    };

    Index lo_node = 0, hi_node = 0;
    const double lo = field.values.minCoeff(&lo_node);
    const double hi = field.values.maxCoeff(&hi_node);
    consider(inlet, lo, inlet - lo, lo_node, "field below inlet temperature");
    consider(hss, hi, hi - hss, hi_node, "field above HSS temperature");
    const double mean = mean_temperature(field);
    consider(inlet, mean, inlet - mean, std::nullopt, "mean below inlet temperature");
    consider(hss, mean, mean - hss, std::nullopt, "mean above HSS temperature");
    if (problem.path) {
        const double out = field[problem.path->outlet()];
        consider(inlet, out, inlet - out, problem.path->outlet(), "outlet below inlet temperature");
    }

    // Heat budget tested with w = theta - inlet, with the HSS balance subtracted:
    //   integral h w (theta - hss) + integral eps sigma w (theta^4 - hss^4) <= 0.
    // Discretely it equals -(w' K w + chi/2 w_out^2) when w vanishes at the constrained inlet.
    const Mesh& mesh = *problem.mesh;
    double identity = 0.0, scale = 0.0;
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const auto xy = mesh.triangle_coords(t);
        Eigen::Vector3d te, w;
        for (int a = 0; a < 3; ++a) {
            te(a) = field[mesh.triangles(t, a)];
            w(a) = te(a) - inlet;
        }
        const Eigen::Matrix3d mass = element::convection<double>(xy, mat.convection_coefficient);
        const double conv = w.dot(mass * (te - Eigen::Vector3d::Constant(hss)));
        double rad = 0.0;
        if (eps > 0.0)
            rad = w.dot(element::radiation<double>(xy, eps, mat.stefan_boltzmann, hss, te).first);
        identity += conv + rad;
        scale += std::abs(w.dot(element::load<double>(xy, f0)));
    }
    r.violation = std::max(0.0, worst_excess);
    finish(r);
    if (identity > 1e-9 * std::max(scale, 1e-12)) {
        r.status = CheckStatus::fail;
        r.detail = fmt::format("energy identity with test function theta - inlet is positive ({:.3e} W K)", identity);
    } else if (r.status == CheckStatus::pass) {
        r.detail = fmt::format("mean {:.6f} K in [{:.6f}, {:.6f}] K; energy identity {:.3e} W K", mean, inlet, hss,
                               identity);
    }
    return r;
}

PrincipleReport check_radiative_uniqueness(const ThermalProblem& problem, const std::vector<Eigen::VectorXd>& guesses,
                                           double tol, const SolveSettings& settings)
{
    const std::string name = "radiative-uniqueness";
    if (!problem.radiative())
        return not_applicable(name, "radiation is not active");
    if (guesses.empty())
        return not_applicable(name, "no initial guesses");
    for (std::size_t g = 0; g < guesses.size(); ++g)
        if (guesses[g].size() != problem.mesh->num_nodes() || !guesses[g].allFinite() || guesses[g].minCoeff() < 0.0)
            throw Error(ErrorCode::invalid_argument,
                        fmt::format("initial guess {} must be finite, non-negative and sized to the mesh", g));

    std::vector<Eigen::VectorXd> fields;
    for (std::size_t g = 0; g < guesses.size(); ++g) {
        try {
            fields.push_back(solve_radiative(problem, settings, guesses[g]).values);
        } catch (const Error& e) {
            throw Error(e.code(), fmt::format("solve from initial guess {} failed: {}", g, e.what()));
        }
    }

    PrincipleReport r;
    r.principle = name;
    r.tolerance = tol;
    r.bound = 0.0;
    r.extreme = 0.0;
    for (const auto& v : fields) {
        Index node = 0;
        const double diff = (v - fields.front()).cwiseAbs().maxCoeff(&node);
        if (diff > r.extreme || !r.worst_node) {
            r.extreme = diff;
            r.worst_node = node;
        }
        if (v.minCoeff() < 0.0) {
            r.violation = std::max(r.violation, -v.minCoeff() + tol);
            r.detail = "a converged field has negative temperatures";
        }
    }
    r.violation = std::max(r.violation, r.extreme);
    if (r.violation <= tol && r.detail.empty())
        r.detail = fmt::format("{} guesses agree to {:.3e} K", guesses.size(), r.extreme);
    finish(r);
    return r;
}

} // namespace vascutherm
