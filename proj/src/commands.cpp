#include "vascutherm/commands.hpp"

#include "vascutherm/assembly.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <ostream>

namespace vascutherm {

using Json = nlohmann::ordered_json;

int exit_code_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::parse_error: return exit_code::parse;
    case ErrorCode::singular_system:
    case ErrorCode::no_convergence:
    case ErrorCode::nonphysical_iterate:
    case ErrorCode::wrong_regime: return exit_code::solver;
    default: return exit_code::validation;
    }
}

namespace {

Json optional_number(const std::optional<double>& v)
{
    return v ? Json(*v) : Json(nullptr);
}

Json number(double v)
{
    return std::isfinite(v) ? Json(v) : Json(nullptr);
}

Json check_to_json(const PrincipleReport& r)
{
    Json j;
    j["principle"] = r.principle;
    j["status"] = std::string(to_string(r.status));
    j["bound_K"] = number(r.bound);
    j["field_extreme_K"] = number(r.extreme);
    j["violation_K"] = r.violation;
    j["worst_node"] = r.worst_node ? Json(*r.worst_node) : Json(nullptr);
    j["tolerance"] = r.tolerance;
    j["detail"] = r.detail;
    return j;
}

void write_file(const RunContext& ctx, const std::string& name, const std::string& content)
{
    std::filesystem::create_directories(ctx.output_dir);
    const auto path = ctx.output_dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out)
        throw Error(ErrorCode::invalid_argument, fmt::format("cannot write '{}'", path.string()));
}

void say(std::ostream* os, const std::string& msg)
{
    if (os)
        *os << msg << '\n';
}

int fail(const std::exception& e, const RunContext& ctx)
{
    const auto* err = dynamic_cast<const Error*>(&e);
    try {
        write_file(ctx, "error.json", error_to_json(e));
    } catch (const std::exception&) {
        // Reporting the original failure matters more than the error file.
    }
    say(ctx.warn, fmt::format("error: {}", e.what()));
    return err ? exit_code_for(err->code()) : 1;
}

ThermalProblem validated_problem(const RunConfig& config)
{
    ThermalProblem problem = build_problem(config);
    require_valid(problem);
    return problem;
}

PrincipleReport energy_check(const TemperatureField& field, const ThermalProblem& problem)
{
    PrincipleReport r;
    r.principle = "energy-balance";
    r.bound = 0.0;
    r.extreme = energy_balance_residual(field, problem);
    r.violation = r.extreme;
    r.tolerance = 1e-6;
    r.status = r.violation <= r.tolerance ? CheckStatus::pass : CheckStatus::fail;
    r.detail = "relative imbalance of the global heat budget";
    return r;
}

std::vector<PrincipleReport> field_checks(const TemperatureField& field, const ThermalProblem& problem)
{
    return {energy_check(field, problem), check_minimum_principle(field, problem),
            check_maximum_principle(field, problem), check_special_case(field, problem)};
}

} // namespace

std::string field_to_csv(const TemperatureField& field)
{
    const Mesh& mesh = *field.mesh;
    std::string out = "node,x,y,theta\n";
    for (Index i = 0; i < mesh.num_nodes(); ++i)
        out += fmt::format("{},{:.17g},{:.17g},{:.17g}\n", i, mesh.nodes(i, 0), mesh.nodes(i, 1), field[i]);
    return out;
}

std::string metrics_to_json(const MetricsReport& m, const std::vector<PrincipleReport>& checks)
{
    Json j;
    j["theta_mean_K"] = m.theta_mean;
    j["theta_outlet_K"] = optional_number(m.theta_outlet);
    j["theta_inlet_K"] = optional_number(m.theta_inlet);
    j["theta_hss_K"] = optional_number(m.theta_hss);
    j["theta_ambient_K"] = m.theta_ambient;
    j["heat_capacity_rate_W_per_K"] = m.heat_capacity_rate;
    j["total_heat_W"] = m.total_heat;
    j["coefficient_of_performance"] = optional_number(m.coefficient_of_performance);
    j["cooling_efficiency"] = optional_number(m.cooling_efficiency);
    j["max_cooling_efficiency"] = optional_number(m.max_cooling_efficiency);
    j["heating_efficiency"] = optional_number(m.heating_efficiency);
    j["regime"] = m.regime;
    j["efficiency_advisory"] = m.advisory;
    j["energy_balance_residual"] = m.energy_balance_residual;
    j["newton_iterations"] = m.newton_iterations;
    if (!checks.empty()) {
        Json v = Json::array();
        for (const auto& c : checks)
            v.push_back(check_to_json(c));
        j["verification"] = v;
    }
    return j.dump(2) + "\n";
}

std::string error_to_json(const std::exception& e)
{
    Json j;
    const auto* err = dynamic_cast<const Error*>(&e);
    j["error"] = err ? std::string(to_string(err->code())) : std::string("internal-error");
    j["message"] = e.what();
    j["exit_code"] = err ? exit_code_for(err->code()) : 1;
    if (const auto* pe = dynamic_cast<const ParseError*>(&e); pe && pe->line() > 0)
        j["line"] = pe->line();
    if (const auto* ve = dynamic_cast<const ValidationError*>(&e)) {
        Json list = Json::array();
        for (const auto& d : ve->diagnostics()) {
            Json item;
            item["code"] = d.code;
            item["message"] = d.message;
            item["index"] = d.index ? Json(*d.index) : Json(nullptr);
            list.push_back(item);
        }
        j["diagnostics"] = list;
    }
    if (const auto* nc = dynamic_cast<const NoConvergenceError*>(&e))
        j["residual_history"] = nc->residual_history();
    return j.dump(2) + "\n";
}

double peclet_warning(const ThermalProblem& problem, const RunContext& ctx)
{
    const auto pe = segment_peclet(problem);
    if (pe.empty())
        return 0.0;
    const auto it = std::max_element(pe.begin(), pe.end());
    if (*it > 2.0)
        say(ctx.warn, fmt::format("warning: segment Peclet number {:.4g} (segment {}) exceeds 2; the unstabilized "
                                  "channel term may oscillate and discrete bounds can fail",
                                  *it, std::distance(pe.begin(), it)));
    return *it;
}

int run_solve(const RunConfig& config, const RunContext& ctx)
{
    try {
        const ThermalProblem problem = validated_problem(config);
        peclet_warning(problem, ctx);
        const auto field = solve(problem, config.solve_settings());
        const auto metrics = compute_metrics(field, problem);
        write_file(ctx, config.field_csv, field_to_csv(field));
        write_file(ctx, config.field_vtk,
                   mesh_to_vtk(*field.mesh, std::span<const double>(field.values.data(), field.values.size())));
        write_file(ctx, config.metrics_json, metrics_to_json(metrics, field_checks(field, problem)));
        say(ctx.log, fmt::format("solved {} nodes; mean {:.4f} K{}", field.values.size(), metrics.theta_mean,
                                 metrics.theta_outlet ? fmt::format(", outlet {:.4f} K", *metrics.theta_outlet) : ""));
        return exit_code::ok;
    } catch (const std::exception& e) {
        return fail(e, ctx);
    }
}

int run_hss(const RunConfig& config, const RunContext& ctx)
{
    try {
        const ThermalProblem problem = validated_problem(config);
        const double f_avg = total_source_heat(problem) / (config.length * config.height);
        const double eps = config.radiation ? config.emissivity : 0.0;
        const double hss = hss_temperature(f_avg, config.convection_coefficient, eps, config.stefan_boltzmann,
                                           config.ambient_temperature);
        Json j;
        j["theta_hss_K"] = hss;
        j["source_average_W_per_m2"] = f_avg;
        j["convection_coefficient_W_per_m2K"] = config.convection_coefficient;
        j["emissivity"] = eps;
        j["stefan_boltzmann"] = config.stefan_boltzmann;
        j["theta_ambient_K"] = config.ambient_temperature;
        write_file(ctx, "hss.json", j.dump(2) + "\n");
        say(ctx.log, fmt::format("HSS temperature {:.6f} K", hss));
        return exit_code::ok;
    } catch (const std::exception& e) {
        return fail(e, ctx);
    }
}

int run_verify(const RunConfig& config, const std::optional<RunConfig>& second, const RunContext& ctx)
{
    try {
        const ThermalProblem problem = validated_problem(config);
        peclet_warning(problem, ctx);
        const auto settings = config.solve_settings();
        const auto field = solve(problem, settings);
        auto checks = field_checks(field, problem);

        if (!problem.radiative()) {
            Perturbation inlet_shift;
            inlet_shift.inlet = 1.0;
            Perturbation ambient_shift;
            ambient_shift.ambient = 1.0;
            for (const auto& [label, p] : {std::pair{"inlet", inlet_shift}, std::pair{"ambient", ambient_shift}}) {
                auto r = check_stability(problem, p, 1.0, 1e-6, settings);
                if (r.applicable())
                    r.detail = fmt::format("{} temperature shifted by 1 K; sup change {:.6g} K", label, r.extreme);
                checks.push_back(std::move(r));
            }
        } else {
            const Index n = problem.mesh->num_nodes();
            const double amb = problem.loads.ambient_temperature;
            checks.push_back(check_radiative_uniqueness(
                problem, {Eigen::VectorXd::Constant(n, amb), Eigen::VectorXd::Constant(n, amb + 100.0)}, 1e-8,
                settings));
        }

        if (second) {
            const ThermalProblem other = validated_problem(*second);
            if (!(*other.mesh == *problem.mesh))
                throw Error(ErrorCode::mismatched_mesh, "comparison configs describe different meshes");
            const auto other_field = solve(other, second->solve_settings());
            checks.push_back(check_comparison(field, other_field, problem, other));
        }

        const bool failed = std::any_of(checks.begin(), checks.end(), [](const auto& c) { return c.failed(); });
        write_file(ctx, "verification.json", metrics_to_json(compute_metrics(field, problem), checks));
        for (const auto& c : checks)
            say(ctx.log, fmt::format("{:<22} {:<15} {}", c.principle, to_string(c.status), c.detail));
        return failed ? exit_code::verification : exit_code::ok;
    } catch (const std::exception& e) {
        return fail(e, ctx);
    }
}

const std::vector<std::string>& sweep_parameters()
{
    static const std::vector<std::string> names{"mass_flow_rate", "inlet_temperature", "f0"};
    return names;
}

int run_sweep(const RunConfig& config, const std::string& parameter, const std::vector<double>& values,
              const RunContext& ctx)
{
    const auto& names = sweep_parameters();
    if (std::find(names.begin(), names.end(), parameter) == names.end())
        throw ParseError(0, fmt::format("unknown sweep parameter '{}' (mass_flow_rate, inlet_temperature, f0)",
                                        parameter));
    auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : std::string(); };
    std::string out = "value,status,theta_mean,theta_outlet,theta_hss,coefficient_of_performance,"
                      "cooling_efficiency,max_cooling_efficiency,heating_efficiency,regime,"
                      "energy_balance_residual,newton_iterations,message\n";
    int failures = 0;
    for (double value : values) {
        RunConfig row = config;
        if (parameter == "mass_flow_rate")
            row.mass_flow_rate = value;
        else if (parameter == "inlet_temperature")
            row.inlet_temperature = value;
        else
            row.source = value;
        try {
            const ThermalProblem problem = validated_problem(row);
            const auto field = solve(problem, row.solve_settings());
            const auto m = compute_metrics(field, problem);
            out += fmt::format("{:.17g},ok,{:.17g},{},{},{},{},{},{},{},{:.17g},{},\n", value, m.theta_mean,
                               cell(m.theta_outlet), cell(m.theta_hss), cell(m.coefficient_of_performance),
                               cell(m.cooling_efficiency), cell(m.max_cooling_efficiency),
                               cell(m.heating_efficiency), m.regime, m.energy_balance_residual,
                               m.newton_iterations);
        } catch (const std::exception& e) {
            ++failures;
            const auto* err = dynamic_cast<const Error*>(&e);
            std::string msg = e.what();
            std::replace(msg.begin(), msg.end(), '"', '\'');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            out += fmt::format("{:.17g},{},,,,,,,,,,,\"{}\"\n", value,
                               err ? to_string(err->code()) : std::string_view("internal-error"), msg);
        }
    }
    try {
        write_file(ctx, "sweep.csv", out);
    } catch (const std::exception& e) {
        return fail(e, ctx);
    }
    say(ctx.log, fmt::format("sweep over {}: {} rows, {} failed", parameter, values.size(), failures));
    return exit_code::ok;
}

} // namespace vascutherm
