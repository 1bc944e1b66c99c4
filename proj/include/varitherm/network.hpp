#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "varitherm/core.hpp"

namespace varitherm {

/// External heat source: either ideal (fixed temperature) or finite (energy
/// function U_R(S_R), entropy integrated alongside the system).
struct HeatSource {
    std::optional<double> T_fixed;
    std::function<double(double)> U_R;   // finite-source energy
    std::function<double(double)> dU_R;  // analytic temperature; FD fallback
    Vec coupling;                        // kappa_AR >= 0, one entry per subsystem
    std::function<Vec(const Vec& q, const Vec& S)> coupling_fn;  // optional state dependence

    bool ideal() const { return T_fixed.has_value(); }
    double temperature(double S_R) const;
    Vec couplings(const Vec& q, const Vec& S, int n_sub) const;
};

struct NetworkState {
    Vec q, v;
    Vec S;                       // one entropy per subsystem
    Vec S_sources;               // entropies of finite sources (size = #sources, ideal slots unused)
    std::optional<Vec> Gamma;    // thermal displacements, dGamma^A = T^A
    std::optional<Vec> Sigma;    // entropy-production accumulators, dSigma_A = dS_A
    double t = 0.0;
};

struct NetworkDeriv {
    Vec dq, dv, dS, dS_sources;
    std::optional<Vec> dGamma, dSigma;
};

/// Declarative dissipation summary used by reversibility_check.
struct DissipationInfo {
    bool friction_zero = true;
    bool kappa_zero = true;
    bool sources_matched = true;  // absent, or coupled at the system temperature
};

/// Discrete system of N interacting simple subsystems sharing mechanical
/// variables, with per-subsystem entropies, internal heat exchange kappa_AB,
/// and external heat sources.
struct NetworkModel {
    int n_sub = 1;
    int dim = 1;
    std::string name;

    std::function<double(const Vec& q, const Vec& v, const Vec& S)> lagrangian;
    std::function<Vec(const Vec&, const Vec&, const Vec&)> dL_dq;
    std::function<Vec(const Vec&, const Vec&, const Vec&)> dL_dv;
    std::function<Vec(const Vec&, const Vec&, const Vec&)> dL_dS;  // length N
    std::function<Mat(const Vec&, const Vec&, const Vec&)> d2L_dv2;
    std::function<Mat(const Vec&, const Vec&, const Vec&)> d2L_dvdq;
    std::function<Mat(const Vec&, const Vec&, const Vec&)> d2L_dvdS;  // dim x N

    std::vector<std::function<Vec(const Vec&, const Vec&, const Vec&)>> frictions;  // per subsystem
    std::vector<std::function<Vec(const Vec&, const Vec&, const Vec&, double)>> external_forces;

    Mat kappa;  // constant conductivity matrix, used when kappa_fn is absent
    std::function<Mat(const Vec& q, const Vec& S)> kappa_fn;

    std::vector<HeatSource> sources;
    Box domain;
    std::optional<DissipationInfo> dissipation;

    Vec grad_q(const Vec& q, const Vec& v, const Vec& S) const;
    Vec grad_v(const Vec& q, const Vec& v, const Vec& S) const;
    Vec grad_S(const Vec& q, const Vec& v, const Vec& S) const;
    Mat mass_matrix(const Vec& q, const Vec& v, const Vec& S) const;
    Mat cross_vq(const Vec& q, const Vec& v, const Vec& S) const;
    Mat cross_vS(const Vec& q, const Vec& v, const Vec& S) const;

    Vec friction(int A, const Vec& q, const Vec& v, const Vec& S) const;
    Vec external(int A, const Vec& q, const Vec& v, const Vec& S, double t) const;
    Mat conductivity(const Vec& q, const Vec& S) const;

    /// Subsystem temperatures T^A = -dL/dS_A; throws NonPositiveTemperature.
    Vec temperatures(const Vec& q, const Vec& v, const Vec& S) const;
    /// Source temperatures (fixed or U_R'(S_R)).
    Vec source_temperatures(const NetworkState& state) const;
};

void check_admissible(const NetworkModel& model, const NetworkState& state);

/// J_fr(A)_B = -(kappa_AB - delta_AB sum_C kappa_AC). Column sums are exactly
/// zero. Validates symmetry, nonnegativity, zero diagonal.
Mat friction_matrix(const Mat& kappa);

struct HeatFlows {
    Mat internal;  // N x N, entry (A,B) = P_H^{B->A} = kappa_AB (T^B - T^A); antisymmetric
    Mat external;  // N x n_sources, entry (A,R) = P_H^{R->A} = kappa_AR (T^R - T^A)
};
HeatFlows heat_flows(const NetworkModel& model, const NetworkState& state);

/// Evolution equations of the discrete system:
///   d/dt dL/dv - dL/dq = sum_A F_fr(A) + F_ext,
///   dL/dS_A dS_A/dt = <F_fr(A), v> + sum_B J_fr(A)_B T^B - P_H^{ext->A}.
/// Finite sources evolve as dS_R/dt = -P^{R->sys}/T^R.
NetworkDeriv network_rhs(const NetworkModel& model, const NetworkState& state);

struct EntropyRate {
    double total;     // sum_A dS_A/dt
    double internal;  // sum_A I^A + sum_{A<B} kappa_AB (T^B-T^A)^2/(T^A T^B) >= 0
    double external;  // sum_A P_H^{ext->A} / T^A
};
EntropyRate entropy_rate(const NetworkModel& model, const NetworkState& state);

struct EntropyBound {
    double lhs;  // dS/dt of the system
    double mid;  // sum_A P_H^{ext->A} / T^A
    double rhs;  // sum_R P_H^{R->sys} / T^R
};
EntropyBound exterior_entropy_bound(const NetworkModel& model, const NetworkState& state);

/// Total mechanical + internal energy E = <dL/dv, v> - L.
double network_energy(const NetworkModel& model, const NetworkState& state);

/// External powers (P_W, P_H) at a state.
std::pair<double, double> network_external_powers(const NetworkModel& model,
                                                  const NetworkState& state);

// ---------------------------------------------------------------------------
// Free-energy (temperature-primitive) formulation
// ---------------------------------------------------------------------------

struct FreeEnergyState {
    Vec q, v;
    Vec T;  // subsystem temperatures, primitive variables
    Vec S_sources;
    double t = 0.0;
};

struct FreeEnergyDeriv {
    Vec dq, dv, dT, dS_sources;
};

/// Discrete system expressed through the free-energy Lagrangian
/// Lf(q, v, T^1..T^N) = L + sum_A T^A S_A, with S_A = dLf/dT^A.
struct FreeEnergyModel {
    int n_sub = 1;
    int dim = 1;
    std::string name;

    std::function<double(const Vec& q, const Vec& v, const Vec& T)> free_lagrangian;
    std::function<Vec(const Vec&, const Vec&, const Vec&)> dLf_dq;
    std::function<Vec(const Vec&, const Vec&, const Vec&)> dLf_dv;
    std::function<Vec(const Vec&, const Vec&, const Vec&)> dLf_dT;  // = entropies S_A
    std::function<Mat(const Vec&, const Vec&, const Vec&)> d2Lf_dv2;
    std::function<Mat(const Vec&, const Vec&, const Vec&)> d2Lf_dvdq;
    std::function<Mat(const Vec&, const Vec&, const Vec&)> heat_capacity;  // C_AB = d2Lf/dT^A dT^B
    std::function<Mat(const Vec&, const Vec&, const Vec&)> dS_dq;          // N x dim
    std::function<Mat(const Vec&, const Vec&, const Vec&)> dS_dv;          // N x dim

    std::vector<std::function<Vec(const Vec&, const Vec&, const Vec&)>> frictions;
    std::vector<std::function<Vec(const Vec&, const Vec&, const Vec&, double)>> external_forces;
    Mat kappa;
    std::function<Mat(const Vec& q, const Vec& T)> kappa_fn;
    std::vector<HeatSource> sources;
    Box domain;

    Vec grad_q(const Vec& q, const Vec& v, const Vec& T) const;
    Vec grad_v(const Vec& q, const Vec& v, const Vec& T) const;
    Vec entropies(const Vec& q, const Vec& v, const Vec& T) const;
    Mat mass_matrix(const Vec& q, const Vec& v, const Vec& T) const;
    Mat cross_vq(const Vec& q, const Vec& v, const Vec& T) const;
    Mat capacity(const Vec& q, const Vec& v, const Vec& T) const;
    Mat entropies_dq(const Vec& q, const Vec& v, const Vec& T) const;
    Mat entropies_dv(const Vec& q, const Vec& v, const Vec& T) const;
    Vec friction(int A, const Vec& q, const Vec& v, const Vec& T) const;
    Vec external(int A, const Vec& q, const Vec& v, const Vec& T, double t) const;
    Mat conductivity(const Vec& q, const Vec& T) const;
};

/// Evolution equations in temperature-primitive form. T^A dS_A/dt equals the
/// entropy-based right-hand side; dT/dt is obtained by solving
///   C dT/dt = dS/dt - (dS/dq) v - (dS/dv) dv/dt
/// against the heat-capacity matrix.
FreeEnergyDeriv free_energy_rhs(const FreeEnergyModel& model, const FreeEnergyState& state);

double free_energy_total_energy(const FreeEnergyModel& model, const FreeEnergyState& state);

}  // namespace varitherm
