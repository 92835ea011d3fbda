#pragma once

// Numerical oracles for the qualitative results on the continuous problem.
// Every check passes, fails at a located worst node, or reports that its
// hypotheses do not hold; none of them mutates its inputs.

#include "vascutherm/model.hpp"
#include "vascutherm/solver.hpp"

#include <Eigen/Core>

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vascutherm {

enum class CheckStatus { pass, fail, not_applicable };

std::string_view to_string(CheckStatus status);

struct PrincipleReport {
    std::string principle;
    CheckStatus status = CheckStatus::not_applicable;
    double bound = std::numeric_limits<double>::quiet_NaN();    // K
    double extreme = std::numeric_limits<double>::quiet_NaN();  // K
    double violation = 0.0;                                     // K, max(0, exceedance)
    std::optional<Index> worst_node;
    double tolerance = 0.0;
    std::string detail;  // reason for not-applicable, or the violated bound

    bool applicable() const { return status != CheckStatus::not_applicable; }
    bool failed() const { return status == CheckStatus::fail; }
};

/// Boundary temperatures that bound the field: ambient, inlet (when the flow
/// pins it) and every prescribed boundary value.
std::vector<double> bound_constants(const ThermalProblem& problem);

/// 1e-6 times the spread of the bound constants and the field values, at least 1e-6 K.
double default_tolerance(const ThermalProblem& problem, const Eigen::VectorXd& values);

PrincipleReport check_minimum_principle(const TemperatureField& field, const ThermalProblem& problem,
                                        std::optional<double> tol = std::nullopt);

PrincipleReport check_maximum_principle(const TemperatureField& field, const ThermalProblem& problem,
                                        std::optional<double> tol = std::nullopt);

/// Problem 1 must have inputs ordered below problem 2; then field 1 <= field 2.
/// Throws invalid-argument when the meshes differ.
PrincipleReport check_comparison(const TemperatureField& field1, const TemperatureField& field2,
                                 const ThermalProblem& problem1, const ThermalProblem& problem2,
                                 std::optional<double> tol = std::nullopt);

/// Boundary-temperature perturbations for the stability check.
struct Perturbation {
    double ambient = 0.0;              // K
    double inlet = 0.0;                // K
    std::map<Index, double> boundary;  // node -> K shift of prescribed values
};

ThermalProblem perturbed(const ThermalProblem& problem, const Perturbation& p);

/// Solves the base and perturbed problems and bounds the sup-norm change by
/// delta (1 + tol). Linear model only; every shift must satisfy |shift| <= delta.
PrincipleReport check_stability(const ThermalProblem& problem, const Perturbation& p, double delta,
                                double tol = 1e-6, const SolveSettings& settings = {});

/// Constant source, adiabatic boundary and inlet at or below the HSS
/// temperature: the field, its mean and the outlet lie in [inlet, HSS], and
/// the energy identity tested with (theta - inlet) has the sign that yields
/// the mean bounds.
PrincipleReport check_special_case(const TemperatureField& field, const ThermalProblem& problem,
                                   std::optional<double> tol = std::nullopt);

/// Newton from each guess must land on the same non-negative field.
/// Throws invalid-argument for a guess with negative entries; solve failures
/// are rethrown with the guess index in the message.
PrincipleReport check_radiative_uniqueness(const ThermalProblem& problem, const std::vector<Eigen::VectorXd>& guesses,
                                           double tol = 1e-8, const SolveSettings& settings = {});

} // namespace vascutherm
