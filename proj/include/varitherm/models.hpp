#pragma once

#include <map>
#include <string>

#include "varitherm/chemistry.hpp"
#include "varitherm/continuum1d.hpp"
#include "varitherm/diagnostics.hpp"
#include "varitherm/integrate.hpp"
#include "varitherm/network.hpp"

// nlohmann/json ships as a single header in vendor/.
#include <json.hpp>

namespace varitherm {

/// Perfect-gas state functions: U = c N R T and p V = N R T, with
///   U(S, N, V) = U0 exp((S/N - S0/N0)/(c R)) (N/N0)^(1 + 1/c) (V0/V)^(1/c).
struct PerfectGas {
    double c = 1.5;   // 3/2 monoatomic, 5/2 diatomic
    double R = 1.0;
    double U0 = 1.5;
    double S0 = 0.0;
    double N0 = 1.0;
    double V0 = 1.0;

    double energy(double S, double N, double V) const;
    double dU_dS(double S, double N, double V) const;   // temperature
    double dU_dV(double S, double N, double V) const;   // -pressure
    double dU_dN(double S, double N, double V) const;
    double temperature(double S, double N, double V) const;
    double pressure(double S, double N, double V) const;
    /// Entropy at which temperature(S, N, V) equals T.
    double entropy_for(double T, double N, double V) const;

    /// Gas whose reference state (S0, N0, V0) sits at temperature T_ref.
    static PerfectGas at_reference(double T_ref, double N0, double V0, double c, double R,
                                   double S0 = 0.0);
};

/// Ideal gas mixture at fixed volume: U = C R T with C = sum_I c_I N_I and
///   T(S, {N}, V) = T0 exp((S - Phi)/(C R)),
///   Phi = sum_I N_I (s0_I - R ln(N_I/(n_ref V))).
/// Gives p = N_tot R T / V and analytic chemical potentials. The same
/// expressions serve per-unit-volume (continuum) form with V = 1.
struct IdealMixture {
    Vec c;    // per-species heat-capacity factors
    Vec s0;   // per-species reference entropies
    double R = 1.0;
    double T0 = 1.0;
    double n_ref = 1.0;

    int species() const { return static_cast<int>(c.size()); }
    double heat_capacity(const Vec& N) const { return c.dot(N); }
    double phi(const Vec& N, double V) const;
    double temperature(double S, const Vec& N, double V) const;
    double energy(double S, const Vec& N, double V) const;
    Vec chemical_potentials(double S, const Vec& N, double V) const;
    double pressure(double S, const Vec& N, double V) const;
    double entropy_for(double T, const Vec& N, double V) const;

    // Multi-compartment variants over a 3 x R mole table with per-compartment
    // volumes; a single entropy is shared (internal thermal equilibrium).
    double phi_multi(const Mat& N, const Vec& vols) const;
    double temperature_multi(double S, const Mat& N, const Vec& vols) const;
    double energy_multi(double S, const Mat& N, const Vec& vols) const;
    Mat chemical_potentials_multi(double S, const Mat& N, const Vec& vols) const;
    double entropy_for_multi(double T, const Mat& N, const Vec& vols) const;
};

/// Volumetric EOS built from an ideal mixture (densities = moles at V = 1).
EOS make_mixture_eos(const IdealMixture& mix, const Vec& molar_mass);

/// Everything a scenario run needs: a flattened vector field, the initial
/// state, diagnostics hooks and output formatting.
struct ModelRuntime {
    Rhs rhs;
    Vec y0;
    SimHooks hooks;
    IntegratorConfig config;

    std::vector<std::string> csv_header;
    std::function<std::vector<double>(double t, const Vec& y)> csv_row;

    bool continuum = false;
    std::function<void(std::ostream&, double t, const Vec& y)> write_snapshot;
    double cfl_dt = std::numeric_limits<double>::infinity();

    std::function<Vec(const Vec& y)> entropies;  // subsystem entropies for drift checks
    std::map<std::string, double> equilibrium_thresholds;
    bool stop_at_equilibrium = false;

    std::function<double(int n_states, std::uint64_t seed)> gradient_check_fn;

    bool audit_energy = true;
    bool audit_second_law = true;
    bool audit_mass = false;
    AuditThresholds thresholds;
};

struct ParamSpec {
    std::string name;
    nlohmann::json default_value;
    std::string doc;
};

struct CatalogEntry {
    std::string name;
    std::string summary;
    std::vector<ParamSpec> params;
    std::function<ModelRuntime(const nlohmann::json& params, const nlohmann::json& initial)>
        build;
};

/// The built-in model catalog.
const std::vector<CatalogEntry>& catalog();

/// Resolve a model name, accepting the reactor formulation aliases
/// (reactor_psi, reactor_N). Returns the entry plus any implied parameter
/// overrides; null when unknown.
struct ResolvedModel {
    const CatalogEntry* entry = nullptr;
    nlohmann::json implied_params;
};
ResolvedModel resolve_model(const std::string& name);

/// Merge user parameters over the entry's defaults; unknown keys raise
/// ParseError.
nlohmann::json merge_params(const CatalogEntry& entry, const nlohmann::json& user);

}  // namespace varitherm
