#include "vascutherm/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <span>
#include <sstream>

namespace vascutherm {

ParseError::ParseError(int line, const std::string& message)
    : Error(ErrorCode::parse_error, line > 0 ? fmt::format("line {}: {}", line, message) : message), line_(line)
{
}

SolveSettings RunConfig::solve_settings() const
{
    SolveSettings s;
    s.linear_tolerance = linear_tolerance;
    s.newton_tolerance = newton_tolerance;
    s.max_newton_iters = max_newton_iters;
    s.max_halvings = max_halvings;
    return s;
}

namespace {

enum class Dim { none, count, length, temperature, mass_flow, specific_heat, conductivity, film, areal_power,
                 line_power, radiation_constant };

struct Unit {
    std::string_view name;
    double scale;
    double offset = 0.0;
};

std::vector<Unit> units_for(Dim d)
{
    switch (d) {
    case Dim::length: return {{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}};
    case Dim::temperature: return {{"K", 1.0}, {"C", 1.0, 273.15}};
    case Dim::mass_flow: return {{"kg/s", 1.0}, {"kg/min", 1.0 / 60.0}, {"g/s", 1e-3}, {"g/min", 1e-3 / 60.0}};
    case Dim::specific_heat: return {{"J/kg/K", 1.0}, {"kJ/kg/K", 1e3}};
    case Dim::conductivity: return {{"W/m/K", 1.0}};
    case Dim::film: return {{"W/m^2/K", 1.0}};
    case Dim::areal_power: return {{"W/m^2", 1.0}};
    case Dim::line_power: return {{"W/m", 1.0}};
    case Dim::radiation_constant: return {{"W/m^2/K^4", 1.0}};
    default: return {};
    }
}

std::string unit_list(Dim d)
{
    std::string out;
    for (const auto& u : units_for(d))
        out += (out.empty() ? "" : ", ") + std::string(u.name);
    return out.empty() ? "none" : out;
}

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
            ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t')
            ++j;
        if (j > i)
            out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

std::optional<double> to_number(std::string_view tok)
{
    double v = 0.0;
    const char* end = tok.data() + tok.size();
    if (!tok.empty() && tok.front() == '+')
        tok.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        return std::nullopt;
    return v;
}

// Parses `n` numbers followed by an optional unit of dimension d.
std::vector<double> quantities(std::span<const std::string_view> toks, std::size_t n, Dim d, int line,
                               std::string_view key)
{
    std::optional<Unit> unit;
    std::size_t count = toks.size();
    if (count == n + 1) {
        const auto units = units_for(d);
        auto it = std::find_if(units.begin(), units.end(), [&](const Unit& u) { return u.name == toks.back(); });
        if (it == units.end())
            throw ParseError(line, fmt::format("unit '{}' does not fit key '{}' (expected {})", toks.back(), key,
                                               unit_list(d)));
        unit = *it;
        --count;
    }
    if (count != n)
        throw ParseError(line, fmt::format("key '{}' expects {} value(s){}", key, n,
                                           d == Dim::none || d == Dim::count ? "" : " and an optional unit"));
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
        auto v = to_number(toks[i]);
        if (!v)
            throw ParseError(line, fmt::format("'{}' is not a number (key '{}')", toks[i], key));
        out.push_back(unit ? *v * unit->scale + unit->offset : *v);
    }
    return out;
}

struct Field {
    std::string_view section;
    std::string_view key;
    bool required;
    bool repeatable;
    std::function<void(RunConfig&, std::span<const std::string_view>, int)> apply;
};

auto scalar(double RunConfig::*member, Dim d, std::string_view key)
{
    return [member, d, key](RunConfig& c, std::span<const std::string_view> t, int line) {
        c.*member = quantities(t, 1, d, line, key).front();
    };
}

template <typename Int> auto integer(Int RunConfig::*member, std::string_view key)
{
    return [member, key](RunConfig& c, std::span<const std::string_view> t, int line) {
        const double v = quantities(t, 1, Dim::count, line, key).front();
        if (v != std::floor(v) || std::abs(v) > 1e9)
            throw ParseError(line, fmt::format("key '{}' expects an integer", key));
        c.*member = static_cast<Int>(v);
    };
}

auto text(std::string RunConfig::*member, std::string_view key)
{
    return [member, key](RunConfig& c, std::span<const std::string_view> t, int line) {
        if (t.size() != 1)
            throw ParseError(line, fmt::format("key '{}' expects one file name without spaces", key));
        c.*member = std::string(t.front());
    };
}

SideCondition side_condition(std::span<const std::string_view> t, int line, std::string_view key)
{
    if (t.empty())
        throw ParseError(line, fmt::format("key '{}' needs adiabatic, flux <value> or temperature <value>", key));
    const auto rest = t.subspan(1);
    if (t.front() == "adiabatic") {
        if (!rest.empty())
            throw ParseError(line, "adiabatic takes no value");
        return Adiabatic{};
    }
    if (t.front() == "flux")
        return PrescribedFlux{quantities(rest, 1, Dim::line_power, line, key).front()};
    if (t.front() == "temperature")
        return PrescribedTemperature{quantities(rest, 1, Dim::temperature, line, key).front()};
    throw ParseError(line, fmt::format("unknown boundary kind '{}' (adiabatic, flux, temperature)", t.front()));
}

const std::vector<Field>& fields()
{
    using T = std::span<const std::string_view>;
    static const std::vector<Field> table = {
        {"geometry", "length", true, false, scalar(&RunConfig::length, Dim::length, "length")},
        {"geometry", "height", true, false, scalar(&RunConfig::height, Dim::length, "height")},
        {"geometry", "nx", true, false, integer(&RunConfig::nx, "nx")},
        {"geometry", "ny", true, false, integer(&RunConfig::ny, "ny")},
        {"vasculature", "waypoint", false, true,
         [](RunConfig& c, T t, int line) {
             const auto v = quantities(t, 2, Dim::length, line, "waypoint");
             c.waypoints.emplace_back(v[0], v[1]);
         }},
        {"material", "thickness", true, false, scalar(&RunConfig::thickness, Dim::length, "thickness")},
        {"material", "conductivity", false, false,
         [](RunConfig& c, T t, int line) {
             const double k = quantities(t, 1, Dim::conductivity, line, "conductivity").front();
             c.conductivity = k * Eigen::Matrix2d::Identity();
         }},
        {"material", "conductivity_xx", false, false,
         [](RunConfig& c, T t, int line) {
             c.conductivity(0, 0) = quantities(t, 1, Dim::conductivity, line, "conductivity_xx").front();
         }},
        {"material", "conductivity_yy", false, false,
         [](RunConfig& c, T t, int line) {
             c.conductivity(1, 1) = quantities(t, 1, Dim::conductivity, line, "conductivity_yy").front();
         }},
        {"material", "conductivity_xy", false, false,
         [](RunConfig& c, T t, int line) {
             const double v = quantities(t, 1, Dim::conductivity, line, "conductivity_xy").front();
             c.conductivity(0, 1) = c.conductivity(1, 0) = v;
         }},
        {"material", "convection_coefficient", true, false,
         scalar(&RunConfig::convection_coefficient, Dim::film, "convection_coefficient")},
        {"material", "emissivity", false, false, scalar(&RunConfig::emissivity, Dim::none, "emissivity")},
        {"material", "stefan_boltzmann", false, false,
         scalar(&RunConfig::stefan_boltzmann, Dim::radiation_constant, "stefan_boltzmann")},
        {"material", "radiation", false, false,
         [](RunConfig& c, T t, int line) {
             if (t.size() == 1 && (t[0] == "on" || t[0] == "true"))
                 c.radiation = true;
             else if (t.size() == 1 && (t[0] == "off" || t[0] == "false"))
                 c.radiation = false;
             else
                 throw ParseError(line, "key 'radiation' expects on or off");
         }},
        {"flow", "mass_flow_rate", false, false, scalar(&RunConfig::mass_flow_rate, Dim::mass_flow, "mass_flow_rate")},
        {"flow", "fluid_heat_capacity", false, false,
         scalar(&RunConfig::fluid_heat_capacity, Dim::specific_heat, "fluid_heat_capacity")},
        {"flow", "inlet_temperature", false, false,
         scalar(&RunConfig::inlet_temperature, Dim::temperature, "inlet_temperature")},
        {"environment", "ambient_temperature", true, false,
         scalar(&RunConfig::ambient_temperature, Dim::temperature, "ambient_temperature")},
        {"source", "value", true, false, scalar(&RunConfig::source, Dim::areal_power, "value")},
        {"source", "region", false, false,
         [](RunConfig& c, T t, int line) {
             const auto v = quantities(t, 4, Dim::length, line, "region");
             if (!(v[0] <= v[2] && v[1] <= v[3]))
                 throw ParseError(line, "region must read x0 y0 x1 y1 with x0 <= x1 and y0 <= y1");
             c.source_region = Rect{v[0], v[1], v[2], v[3]};
         }},
        {"boundary", "bottom", false, false,
         [](RunConfig& c, T t, int line) { c.sides[0] = side_condition(t, line, "bottom"); }},
        {"boundary", "right", false, false,
         [](RunConfig& c, T t, int line) { c.sides[1] = side_condition(t, line, "right"); }},
        {"boundary", "top", false, false,
         [](RunConfig& c, T t, int line) { c.sides[2] = side_condition(t, line, "top"); }},
        {"boundary", "left", false, false,
         [](RunConfig& c, T t, int line) { c.sides[3] = side_condition(t, line, "left"); }},
        {"solver", "linear_tolerance", false, false,
         scalar(&RunConfig::linear_tolerance, Dim::none, "linear_tolerance")},
        {"solver", "newton_tolerance", false, false,
         scalar(&RunConfig::newton_tolerance, Dim::none, "newton_tolerance")},
        {"solver", "max_newton_iters", false, false, integer(&RunConfig::max_newton_iters, "max_newton_iters")},
        {"solver", "max_halvings", false, false, integer(&RunConfig::max_halvings, "max_halvings")},
        {"output", "field_csv", false, false, text(&RunConfig::field_csv, "field_csv")},
        {"output", "vtk", false, false, text(&RunConfig::field_vtk, "vtk")},
        {"output", "metrics", false, false, text(&RunConfig::metrics_json, "metrics")},
    };
    return table;
}

std::string name_of(const Field& f)
{
    return fmt::format("{}.{}", f.section, f.key);
}

} // namespace

RunConfig parse_config(std::string_view text)
{
    RunConfig config;
    std::set<std::string> seen;
    std::set<std::string> sections;
    std::string section;
    int line_no = 0;
    int flow_line = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError(line_no, "section header must read [name]");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            const bool known = std::any_of(fields().begin(), fields().end(),
                                           [&](const Field& f) { return f.section == section; });
            if (!known)
                throw ParseError(line_no, fmt::format("unknown section [{}]", section));
            if (!sections.insert(section).second)
                throw ParseError(line_no, fmt::format("section [{}] appears twice", section));
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(line_no, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        if (section.empty())
            throw ParseError(line_no, fmt::format("key '{}' appears before any [section]", key));
        auto it = std::find_if(fields().begin(), fields().end(),
                               [&](const Field& f) { return f.section == section && f.key == key; });
        if (it == fields().end())
            throw ParseError(line_no, fmt::format("unknown key '{}' in [{}]", key, section));
        if (!seen.insert(name_of(*it)).second && !it->repeatable)
            throw ParseError(line_no, fmt::format("key '{}' given twice", name_of(*it)));
        const auto toks = split(trim(line.substr(eq + 1)));
        it->apply(config, toks, line_no);
        if (section == "flow")
            flow_line = line_no;
    }

    std::vector<std::string> missing;
    for (const auto& f : fields())
        if (f.required && !seen.contains(name_of(f)))
            missing.push_back(name_of(f));
    const bool any_k = seen.contains("material.conductivity") || seen.contains("material.conductivity_xx") ||
                       seen.contains("material.conductivity_yy");
    if (!any_k)
        missing.push_back("material.conductivity");
    if (!config.waypoints.empty())
        for (const char* k : {"flow.mass_flow_rate", "flow.fluid_heat_capacity", "flow.inlet_temperature"})
            if (!seen.contains(k))
                missing.push_back(k);
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing)
            list += (list.empty() ? "" : ", ") + m;
        throw ParseError(0, fmt::format("missing required key(s): {}", list));
    }
    if (seen.contains("material.conductivity") &&
        (seen.contains("material.conductivity_xx") || seen.contains("material.conductivity_yy") ||
         seen.contains("material.conductivity_xy")))
        throw ParseError(0, "give either conductivity or conductivity_xx/_yy/_xy, not both");
    if (!any_k || (!seen.contains("material.conductivity") &&
                   !(seen.contains("material.conductivity_xx") && seen.contains("material.conductivity_yy"))))
        throw ParseError(0, "anisotropic conductivity needs both conductivity_xx and conductivity_yy");
    if (config.waypoints.size() == 1)
        throw ParseError(0, "vasculature needs at least two waypoints");
    if (config.waypoints.empty() && flow_line > 0)
        throw ParseError(flow_line, "[flow] given without any vasculature waypoint");
    return config;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError(0, fmt::format("cannot read config file '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(e.line(), fmt::format("{}: {}", path, e.what()));
    }
}

std::string serialize_config(const RunConfig& c)
{
    auto num = [](double v) { return fmt::format("{:.17g}", v); };
    std::string out;
    auto line = [&out](std::string_view s) {
        out += s;
        out += '\n';
    };
    line("[geometry]");
    line(fmt::format("length = {} m", num(c.length)));
    line(fmt::format("height = {} m", num(c.height)));
    line(fmt::format("nx = {}", c.nx));
    line(fmt::format("ny = {}", c.ny));

    if (!c.waypoints.empty()) {
        line("");
        line("[vasculature]");
        for (const auto& w : c.waypoints)
            line(fmt::format("waypoint = {} {} m", num(w.x()), num(w.y())));
    }

    line("");
    line("[material]");
    line(fmt::format("thickness = {} m", num(c.thickness)));
    const auto& k = c.conductivity;
    if (k(0, 1) == 0.0 && k(1, 0) == 0.0 && k(0, 0) == k(1, 1)) {
        line(fmt::format("conductivity = {} W/m/K", num(k(0, 0))));
    } else {
        line(fmt::format("conductivity_xx = {} W/m/K", num(k(0, 0))));
        line(fmt::format("conductivity_yy = {} W/m/K", num(k(1, 1))));
        line(fmt::format("conductivity_xy = {} W/m/K", num(k(0, 1))));
    }
    line(fmt::format("convection_coefficient = {} W/m^2/K", num(c.convection_coefficient)));
    line(fmt::format("emissivity = {}", num(c.emissivity)));
    line(fmt::format("stefan_boltzmann = {} W/m^2/K^4", num(c.stefan_boltzmann)));
    line(fmt::format("radiation = {}", c.radiation ? "on" : "off"));

    if (!c.waypoints.empty()) {
        line("");
        line("[flow]");
        line(fmt::format("mass_flow_rate = {} kg/s", num(c.mass_flow_rate)));
        line(fmt::format("fluid_heat_capacity = {} J/kg/K", num(c.fluid_heat_capacity)));
        line(fmt::format("inlet_temperature = {} K", num(c.inlet_temperature)));
    }

    line("");
    line("[environment]");
    line(fmt::format("ambient_temperature = {} K", num(c.ambient_temperature)));

    line("");
    line("[source]");
    line(fmt::format("value = {} W/m^2", num(c.source)));
    if (c.source_region) {
        const auto& r = *c.source_region;
        line(fmt::format("region = {} {} {} {} m", num(r.x0), num(r.y0), num(r.x1), num(r.y1)));
    }

    line("");
    line("[boundary]");
    static constexpr std::array<std::string_view, 4> side_names{"bottom", "right", "top", "left"};
    for (std::size_t s = 0; s < 4; ++s) {
        const auto& cond = c.sides[s];
        std::string value = "adiabatic";
        if (const auto* q = std::get_if<PrescribedFlux>(&cond))
            value = fmt::format("flux {} W/m", num(q->value));
        else if (const auto* t = std::get_if<PrescribedTemperature>(&cond))
            value = fmt::format("temperature {} K", num(t->value));
        line(fmt::format("{} = {}", side_names[s], value));
    }

    line("");
    line("[solver]");
    line(fmt::format("linear_tolerance = {}", num(c.linear_tolerance)));
    line(fmt::format("newton_tolerance = {}", num(c.newton_tolerance)));
    line(fmt::format("max_newton_iters = {}", c.max_newton_iters));
    line(fmt::format("max_halvings = {}", c.max_halvings));

    line("");
    line("[output]");
    line(fmt::format("field_csv = {}", c.field_csv));
    line(fmt::format("vtk = {}", c.field_vtk));
    line(fmt::format("metrics = {}", c.metrics_json));
    return out;
}

ThermalProblem build_problem(const RunConfig& c)
{
    Mesh mesh = generate_rect_mesh(c.length, c.height, c.nx, c.ny);
    ThermalProblem p;
    apply_side_conditions(mesh, p.loads, c.sides);
    p.loads.source = rect_source(mesh, c.source, c.source_region);
    p.loads.ambient_temperature = c.ambient_temperature;
    if (!c.waypoints.empty())
        p.path = embed_vasculature(mesh, c.waypoints);
    p.mesh = std::make_shared<const Mesh>(std::move(mesh));

    p.material.thickness = c.thickness;
    p.material.conductivity = {c.conductivity};
    p.material.convection_coefficient = c.convection_coefficient;
    p.material.emissivity = c.emissivity;
    p.material.stefan_boltzmann = c.stefan_boltzmann;
    p.radiation_enabled = c.radiation;

    p.flow.mass_flow_rate = c.mass_flow_rate;
    p.flow.fluid_heat_capacity = c.fluid_heat_capacity;
    p.flow.inlet_temperature = c.inlet_temperature;
    return p;
}

} // namespace vascutherm
