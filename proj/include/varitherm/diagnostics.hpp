#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "varitherm/integrate.hpp"
#include "varitherm/network.hpp"

namespace varitherm {

struct AuditThresholds {
    double energy_rel = 1e-6;
    double production_floor = -1e-12;
    double equilibrium_rel = 1e-4;
    double mass_abs = 1e-10;
};

/// First-law audit: max over samples of
///   |E(t) - E(0) - integral of (P_W + P_H)| / max(1, |E(0)|),
/// with the power integral taken by the trapezoid rule on the recorded
/// samples. Requires at least two samples.
double energy_audit(const Trajectory& traj);

/// Second-law audit: the minimum recorded internal production. Uses the
/// per-sample "i_min" extra when present (continuum runs, min over cells),
/// otherwise the I field.
double second_law_audit(const Trajectory& traj);

/// Mass audit for reacting runs: max |mass(t) - mass(0)| over samples, from
/// the per-sample "mass" extra. Returns 0 when the extra is absent.
double mass_audit(const Trajectory& traj);

/// True iff the recorded total entropy is nondecreasing (within floor).
bool entropy_monotone(const Trajectory& traj, double floor = -1e-12);

/// Structural reversibility: all friction laws identically zero, no internal
/// conduction, and sources absent or temperature-matched. Uses the model's
/// declarative dissipation summary when present; otherwise probes the model
/// at seeded random admissible states (a heuristic, noted in the result).
bool reversibility_check(const NetworkModel& model);

struct EquilibriumReport {
    bool found = false;
    double t_star = 0.0;
    std::vector<std::pair<std::string, double>> final_gaps;
};

/// First sample time at which every recorded "gap_*" extra falls below its
/// threshold (by name; missing names use the default). Empty optional-like
/// `found=false` when the gaps never close.
EquilibriumReport equilibrium_report(const Trajectory& traj,
                                     const std::map<std::string, double>& thresholds,
                                     double default_threshold = 1e-4);

/// Randomized comparison of a model's analytic partials against central
/// finite differences of its Lagrangian. Returns the max relative error.
struct SamplingBox {
    Vec q_lo, q_hi, v_lo, v_hi;
    Vec S_lo, S_hi;  // length 1 for simple models
};
double gradient_check(const SimpleModel& model, const SamplingBox& box, int n_states,
                      std::uint64_t seed);
double gradient_check(const NetworkModel& model, const SamplingBox& box, int n_states,
                      std::uint64_t seed);
/// Also verifies the heat-capacity matrix is symmetric at each sample.
double gradient_check(const FreeEnergyModel& model, const SamplingBox& box, int n_states,
                      std::uint64_t seed);

struct AuditReport {
    double max_energy_residual = 0.0;
    double min_internal_production = 0.0;
    bool entropy_monotone = true;
    double mass_residual = 0.0;
    std::optional<double> equilibrium_time;
    std::vector<std::pair<std::string, double>> equilibrium_gaps;  // final values
    std::vector<std::string> notes;
    bool passed = true;
};

/// Run the enabled audits over a trajectory and collect a report.
AuditReport run_audits(const Trajectory& traj, const AuditThresholds& thresholds,
                       bool check_energy = true, bool check_second_law = true,
                       bool check_mass = false);

/// Serialize as a key = value text document.
void write_audit_report(std::ostream& os, const AuditReport& report);

}  // namespace varitherm
