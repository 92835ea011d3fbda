#pragma once

#include "vascutherm/model.hpp"
#include "vascutherm/solver.hpp"

#include <optional>
#include <string>

namespace vascutherm {

/// Positive root of h_T (T - T_amb) + eps sigma (T^4 - T_amb^4) = f0.
/// Throws invalid-argument for f0 < 0 or when h_T + eps sigma = 0.
double hss_temperature(double f0, double h, double emissivity, double sigma, double ambient);

/// Area-weighted mean; exact for P1 fields.
double mean_temperature(const TemperatureField& field);

double outlet_temperature(const TemperatureField& field, const VasculaturePath& path);

/// chi (T_out - T_in) / total_heat. Throws invalid-argument when total_heat <= 0.
double coefficient_of_performance(double outlet, double inlet, double chi, double total_heat);

/// Throws wrong-regime unless inlet <= hss and hss > min(inlet, ambient).
double cooling_efficiency(double hss, double mean, double inlet, double ambient);

/// Throws wrong-regime when inlet > hss, or when hss == ambient < inlet.
double max_cooling_efficiency(double hss, double inlet, double ambient);

/// Throws wrong-regime unless inlet >= hss and max(inlet, ambient) > hss.
double heating_efficiency(double hss, double mean, double inlet, double ambient);

/// Terms of the global heat budget, all in W, integrated with the assembly
/// quadrature. At a converged solution
///   advected = supplied - convected - radiated - boundary_outflow + constraint_heat
/// where constraint_heat is the heat exchanged through prescribed-temperature
/// and inlet nodes (their nodal reactions).
struct EnergyBalance {
    double supplied = 0.0;          // integral of f
    double convected = 0.0;         // integral of h_T (T - T_amb)
    double radiated = 0.0;          // integral of eps sigma (T^4 - T_amb^4), 0 unless radiative
    double boundary_outflow = 0.0;  // integral of q_p over flux edges
    double constraint_heat = 0.0;
    double advected = 0.0;          // chi (T_out - T_in)
    double residual = 0.0;          // relative imbalance

    double imbalance() const
    {
        return advected - (supplied - convected - radiated - boundary_outflow + constraint_heat);
    }
};

EnergyBalance energy_balance(const TemperatureField& field, const ThermalProblem& problem);

/// Relative imbalance of the global heat budget.
double energy_balance_residual(const TemperatureField& field, const ThermalProblem& problem);

/// Total heat supplied by the source, W.
double total_source_heat(const ThermalProblem& problem);

struct MetricsReport {
    double theta_mean = 0.0;
    std::optional<double> theta_outlet;
    std::optional<double> theta_inlet;
    std::optional<double> theta_hss;  // from the domain-average source
    double theta_ambient = 0.0;
    double heat_capacity_rate = 0.0;
    double total_heat = 0.0;
    std::optional<double> coefficient_of_performance;
    std::optional<double> cooling_efficiency;
    std::optional<double> max_cooling_efficiency;
    std::optional<double> heating_efficiency;
    std::string regime;       // "cooling", "heating" or "none"
    bool advisory = false;    // efficiencies from a non-uniform source
    double energy_balance_residual = 0.0;
    int newton_iterations = 0;
};

MetricsReport compute_metrics(const TemperatureField& field, const ThermalProblem& problem);

} // namespace vascutherm
