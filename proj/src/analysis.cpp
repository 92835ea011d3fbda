#include "vascutherm/analysis.hpp"

#include "vascutherm/assembly.hpp"
#include "vascutherm/element.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <initializer_list>

namespace vascutherm {

double hss_temperature(double f0, double h, double emissivity, double sigma, double ambient)
{
    if (!(f0 >= 0.0))
        throw Error(ErrorCode::invalid_argument, fmt::format("HSS needs a non-negative source (got f0 = {})", f0));
    const double es = emissivity * sigma;
    if (!(h >= 0.0 && es >= 0.0 && h + es > 0.0))
        throw Error(ErrorCode::invalid_argument, "HSS needs h_T + eps sigma > 0");
    if (!(ambient > 0.0))
        throw Error(ErrorCode::invalid_argument, "ambient temperature must be positive");

    const double amb4 = std::pow(ambient, 4);
    auto g = [&](double t) { return h * (t - ambient) + es * (t * t * t * t - amb4) - f0; };
    auto dg = [&](double t) { return h + 4.0 * es * t * t * t; };
    if (f0 == 0.0)
        return ambient;

    double lo = ambient;
    double hi = ambient + f0 / std::max(h, 4.0 * es * ambient * ambient * ambient);
    while (g(hi) < 0.0)
        hi = ambient + 2.0 * (hi - ambient);

    // g is increasing and convex above ambient; Newton from the right end stays
    // bracketed, bisection guards against roundoff.
    double t = hi;
    for (int it = 0; it < 200; ++it) {
        const double gt = g(t);
        if (gt == 0.0)
            return t;
        (gt > 0.0 ? hi : lo) = t;
        double next = t - gt / dg(t);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - t) <= 4.0 * std::numeric_limits<double>::epsilon() * t)
            return next;
        t = next;
    }
    if (std::abs(g(t)) > 1e-9 * std::max(f0, 1.0))
        throw Error(ErrorCode::no_convergence, "HSS root search did not converge");
    return t;
}

double mean_temperature(const TemperatureField& field)
{
    const Mesh& mesh = *field.mesh;
    double weighted = 0.0, area = 0.0;
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const double a = mesh.signed_area(t);
        weighted += a * (field[mesh.triangles(t, 0)] + field[mesh.triangles(t, 1)] + field[mesh.triangles(t, 2)]) / 3.0;
        area += a;
    }
    return weighted / area;
}

double outlet_temperature(const TemperatureField& field, const VasculaturePath& path)
{
    return field[path.outlet()];
}

double coefficient_of_performance(double outlet, double inlet, double chi, double total_heat)
{
    if (!(total_heat > 0.0))
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("coefficient of performance needs positive supplied heat (got {} W)", total_heat));
    return chi * (outlet - inlet) / total_heat;
}

double cooling_efficiency(double hss, double mean, double inlet, double ambient)
{
    const double floor = std::min(inlet, ambient);
    if (!(inlet <= hss))
        throw Error(ErrorCode::wrong_regime,
                    fmt::format("cooling efficiency needs inlet {} K <= HSS {} K", inlet, hss));
    if (!(hss > floor))
        throw Error(ErrorCode::wrong_regime,
                    fmt::format("cooling efficiency needs HSS {} K above min(inlet, ambient) = {} K", hss, floor));
    return (hss - mean) / (hss - floor);
}

double max_cooling_efficiency(double hss, double inlet, double ambient)
{
    if (!(inlet <= hss))
        throw Error(ErrorCode::wrong_regime,
                    fmt::format("max cooling efficiency needs inlet {} K <= HSS {} K", inlet, hss));
    if (inlet <= ambient)
        return 1.0;
    if (hss == ambient)
        throw Error(ErrorCode::wrong_regime, "max cooling efficiency undefined: HSS equals ambient");
    return (hss - inlet) / (hss - ambient);
}

double heating_efficiency(double hss, double mean, double inlet, double ambient)
{
    const double ceiling = std::max(inlet, ambient);
    if (!(inlet >= hss))
        throw Error(ErrorCode::wrong_regime,
                    fmt::format("heating efficiency needs inlet {} K >= HSS {} K", inlet, hss));
    if (!(ceiling > hss))
        throw Error(ErrorCode::wrong_regime,
                    fmt::format("heating efficiency needs max(inlet, ambient) = {} K above HSS {} K", ceiling, hss));
    return (mean - hss) / (ceiling - hss);
}

double total_source_heat(const ThermalProblem& problem)
{
    const Mesh& mesh = *problem.mesh;
    double q = 0.0;
    for (Index t = 0; t < mesh.num_triangles(); ++t)
        q += problem.loads.source[static_cast<std::size_t>(t)] * mesh.signed_area(t);
    return q;
}

EnergyBalance energy_balance(const TemperatureField& field, const ThermalProblem& problem)
{
    const Mesh& mesh = *problem.mesh;
    if (field.mesh.get() != problem.mesh.get() && !(*field.mesh == mesh))
        throw Error(ErrorCode::mismatched_mesh, "field and problem live on different meshes");
    const auto& mat = problem.material;
    const double amb = problem.loads.ambient_temperature;

    EnergyBalance eb;
    eb.supplied = total_source_heat(problem);
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const auto xy = mesh.triangle_coords(t);
        const double area = mesh.signed_area(t);
        Eigen::Vector3d te;
        for (int a = 0; a < 3; ++a)
            te(a) = field[mesh.triangles(t, a)];
        eb.convected += mat.convection_coefficient * area * (te.mean() - amb);
        if (problem.radiative())
            eb.radiated +=
                element::radiation<double>(xy, mat.emissivity, mat.stefan_boltzmann, amb, te).first.sum();
    }
    for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
        if (e >= problem.loads.neumann.size() || !problem.loads.neumann[e])
            continue;
        const auto [p, q] = mesh.boundary_edges[e].nodes;
        eb.boundary_outflow += *problem.loads.neumann[e] * (mesh.node(q) - mesh.node(p)).norm();
    }
    const Eigen::VectorXd r = nodal_residual(problem, field.values);
    for (const auto& [v, value] : constraint_map(problem))
        eb.constraint_heat += r(v);
    if (problem.path)
        eb.advected = problem.heat_capacity_rate() * (field[problem.path->outlet()] - field[problem.path->inlet()]);

    double scale = 1e-12;
    for (double term : {eb.supplied, eb.convected, eb.radiated, eb.boundary_outflow, eb.constraint_heat, eb.advected})
        scale = std::max(scale, std::abs(term));
    eb.residual = std::abs(eb.imbalance()) / scale;
    return eb;
}

double energy_balance_residual(const TemperatureField& field, const ThermalProblem& problem)
{
    return energy_balance(field, problem).residual;
}

MetricsReport compute_metrics(const TemperatureField& field, const ThermalProblem& problem)
{
    const Mesh& mesh = *problem.mesh;
    MetricsReport m;
    m.theta_mean = mean_temperature(field);
    m.theta_ambient = problem.loads.ambient_temperature;
    m.heat_capacity_rate = problem.heat_capacity_rate();
    m.total_heat = total_source_heat(problem);
    m.energy_balance_residual = energy_balance_residual(field, problem);
    m.newton_iterations = field.info.iterations;
    m.regime = "none";

    const auto [fmin, fmax] = std::minmax_element(problem.loads.source.begin(), problem.loads.source.end());
    m.advisory = fmin != problem.loads.source.end() && *fmin != *fmax;

    const double f_avg = m.total_heat / (mesh.length * mesh.height);
    const auto& mat = problem.material;
    const double eps = problem.radiation_enabled ? mat.emissivity : 0.0;
    if (f_avg >= 0.0 && mat.convection_coefficient + eps * mat.stefan_boltzmann > 0.0)
        m.theta_hss = hss_temperature(f_avg, mat.convection_coefficient, eps, mat.stefan_boltzmann, m.theta_ambient);

    if (!problem.path)
        return m;
    m.theta_inlet = problem.flow.inlet_temperature;
    m.theta_outlet = field[problem.path->outlet()];
    if (m.total_heat > 0.0)
        m.coefficient_of_performance =
            coefficient_of_performance(*m.theta_outlet, *m.theta_inlet, m.heat_capacity_rate, m.total_heat);
    if (!m.theta_hss)
        return m;

    const double hss = *m.theta_hss, inlet = *m.theta_inlet;
    auto attempt = [](auto&& fn) -> std::optional<double> {
        try {
            return fn();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::wrong_regime)
                throw;
            return std::nullopt;
        }
    };
    if (inlet <= hss) {
        m.regime = "cooling";
        m.cooling_efficiency = attempt([&] { return cooling_efficiency(hss, m.theta_mean, inlet, m.theta_ambient); });
        m.max_cooling_efficiency = attempt([&] { return max_cooling_efficiency(hss, inlet, m.theta_ambient); });
    } else {
        m.regime = "heating";
        m.heating_efficiency = attempt([&] { return heating_efficiency(hss, m.theta_mean, inlet, m.theta_ambient); });
    }
    return m;
}

} // namespace vascutherm
