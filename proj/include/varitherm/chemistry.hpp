#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "varitherm/fd.hpp"
#include "varitherm/linalg.hpp"

namespace varitherm {

/// Tolerance below which a slightly negative mole count is treated as zero.
inline constexpr double kMoleTol = 1e-12;

/// Chemical reaction network: R species, r reactions, forward/backward
/// stoichiometric coefficients, molar masses, a rate law and an internal
/// energy U(S, N_1..N_R, V). Mass conservation per reaction (sum_I nu^a_I M^I
/// = 0) is validated at construction.
struct ReactionNetwork {
    int n_species = 0;
    int n_reactions = 0;
    Mat nu_fwd;  // r x R, nonnegative
    Mat nu_bwd;  // r x R, nonnegative
    Mat nu;      // nu_bwd - nu_fwd
    Vec molar_mass;

    /// Rate-coefficient matrix (r x r, symmetric PSD), possibly state dependent.
    std::function<Mat(const Vec& N, double S)> rate_matrix;
    /// Optional general rate law J_fr(N, S, affinity); overrides rate_matrix.
    std::function<Vec(const Vec& N, double S, const Vec& affinity)> rate_flux;

    std::function<double(double S, const Vec& N, double V)> internal_energy;
    std::function<Vec(double S, const Vec& N, double V)> dU_dN;   // chemical potentials
    std::function<double(double S, const Vec& N, double V)> dU_dS;  // temperature
    std::function<double(double S, const Vec& N, double V)> dU_dV;  // -pressure

    void validate() const;

    Vec chemical_potentials(double S, const Vec& N, double V) const;
    double temperature(double S, const Vec& N, double V) const;  // throws if <= 0
    double pressure(double S, const Vec& N, double V) const;
    Mat rates(const Vec& N, double S) const;
    Vec flux(const Vec& N, double S, const Vec& affinity) const;
};

/// Affinity vector: A^a = -sum_I nu^a_I mu^I.
Vec affinity(const ReactionNetwork& net, const Vec& mu);

/// Throws NegativeMoles when any entry is below -kMoleTol; values in
/// (-kMoleTol, 0] are accepted (step-rejection headroom).
void check_moles(const Vec& N);

struct ReactorParams {
    Vec N_ref;        // mole counts at the reference time, N_I(t1)
    double V0 = 1.0;  // fixed volume
    double P_H = 0.0; // external heat power
};

struct PsiDeriv {
    Vec dpsi;
    double dS = 0.0;
};

/// Degree-of-advancement formulation:
///   dpsi_a/dt = L_ab A^b,   T dS/dt = L_ab A^a A^b + P_H,
/// with N_I(t) = N_I(t1) + nu^a_I psi_a.
PsiDeriv reactor_rhs_psi(const ReactionNetwork& net, const Vec& psi, double S,
                         const ReactorParams& params);

/// Mole counts reconstructed from the advancement variables.
Vec moles_from_psi(const ReactionNetwork& net, const Vec& psi, const Vec& N_ref);

struct NDeriv {
    Vec dN;
    double dS = 0.0;
    Vec dW;   // displacement rates dW^I/dt = mu^I (diagnostic accumulators)
    Vec dnu;  // reaction displacement rates, dnu^a/dt = -A^a
};

/// Mole-count formulation:
///   dN_I/dt = J_fr_a nu^a_I,   T dS/dt = J_fr_a A^a + P_H.
/// With J_fr = L A the flow is conjugate to the psi formulation. The
/// displacement rates dW^I/dt = mu^I are available as diagnostics.
NDeriv reactor_rhs_N(const ReactionNetwork& net, const Vec& N, double S, double P_H,
                     double V0);

struct PistonParams {
    double mass = 1.0;
    double area = 1.0;
    double lambda = 0.0;  // linear piston friction coefficient
    Vec N_ref;            // composition at psi = 0
    std::function<double(double t)> F_ext;
    double P_H = 0.0;
    double x_min = 0.0;  // admissible piston range (volume positivity)
    double x_max = std::numeric_limits<double>::infinity();
};

struct ChemoMechDeriv {
    double dx = 0.0, dv = 0.0;
    Vec dpsi;
    double dS = 0.0;
    double prod_friction = 0.0, prod_chemical = 0.0, prod_external = 0.0;  // dS/dt split
};

/// Reactions in a piston-cylinder, V = area * x:
///   m x'' = p A - lambda x' + F_ext,
///   dpsi_a/dt = L_ab A^b,
///   T dS/dt = lambda x'^2 + L_ab A^a A^b + P_H.
ChemoMechDeriv chemo_mechanical_rhs(const ReactionNetwork& net, const PistonParams& piston,
                                    double x, double v, const Vec& psi, double S, double t);

/// Lumped three-compartment diffusion cell (reservoir 1 | membrane | reservoir 2)
/// with a single shared entropy. Mole counts are a 3 x R matrix (rows:
/// compartments in that order). Fluxes follow the built-in law
///   J1_I = -g1_I (mu1_I - mum_I),   J2_I = -g2_I (mum_I - mu2_I),
/// whose signs make every diffusion term a nonnegative entropy producer.
struct CompartmentModel {
    int n_species = 1;
    std::function<double(double S, const Mat& N)> internal_energy;
    std::function<Mat(double S, const Mat& N)> dU_dN;   // 3 x R chemical potentials
    std::function<double(double S, const Mat& N)> dU_dS;  // temperature
    Vec g1, g2;  // conductances, length R, nonnegative
    std::array<Mat, 3> rate_matrices;  // per-compartment reaction coefficients (r x r)
    double P_H = 0.0;

    void validate(int n_reactions = 0) const;
    Mat chemical_potentials(double S, const Mat& N) const;
    double temperature(double S, const Mat& N) const;
};

struct MembraneDeriv {
    Mat dN;  // 3 x R
    double dS = 0.0;
};

/// Diffusion only: dN1 = J1, dNm = -J1 + J2, dN2 = -J2;
/// -T dS/dt = sum_I [J1_I (mu1_I - mum_I) + J2_I (mum_I - mu2_I)] - P_H.
MembraneDeriv membrane_rhs(const CompartmentModel& model, const Mat& N, double S);

/// Diffusion plus per-compartment reactions J_fr(k) = L^(k) A_(k):
/// each compartment row gains sum_a J_fr(k)_a nu^a_I, and the entropy equation
/// gains sum_{k,a} J_fr(k)_a A^a_(k).
MembraneDeriv reacting_membrane_rhs(const CompartmentModel& model, const ReactionNetwork& net,
                                    const Mat& N, double S);

}  // namespace varitherm
