// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every tolerance is pinned here, not configurable.

#include <cstdio>
#include <string>
#include <vector>

#include "varitherm/chemistry.hpp"
#include "varitherm/diagnostics.hpp"
#include "varitherm/models.hpp"
#include "varitherm/scenario.hpp"

using namespace varitherm;
using nlohmann::json;

namespace {

int g_failures = 0;

void detail(const std::string& line) { std::printf("        %s\n", line.c_str()); }

void criterion(int number, const std::string& name, bool ok) {
    std::printf("[%s] criterion %2d: %s\n", ok ? "PASS" : "FAIL", number, name.c_str());
    if (!ok) ++g_failures;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

ModelRuntime build(const std::string& name, const json& params = json::object(),
                   const json& initial = json::object()) {
    const ResolvedModel resolved = resolve_model(name);
    if (!resolved.entry) throw ParseError("unknown model " + name);
    json user = params;
    for (auto it = resolved.implied_params.begin(); it != resolved.implied_params.end(); ++it)
        user[it.key()] = it.value();
    return resolved.entry->build(merge_params(*resolved.entry, user), initial);
}

IntegratorConfig rk4_config(double t_end = 10.0, double dt = 1e-3, int record_every = 1) {
    IntegratorConfig cfg;
    cfg.method = IntegratorConfig::Method::rk4;
    cfg.dt = dt;
    cfg.t_end = t_end;
    cfg.record_every = record_every;
    return cfg;
}

struct OdeScenario {
    std::string name;
    json isolated;    // parameters zeroing every external drive
    json reversible;  // parameters zeroing every dissipation as well
    json driven;      // parameters enabling a source/drive (empty = none)
};

const std::vector<OdeScenario>& ode_scenarios() {
    static const std::vector<OdeScenario> list = {
        {"one_cylinder", json::object(), json{{"lambda", 0.0}}, json{{"P_H", 0.05}}},
        {"mass_spring", json::object(), json{{"lambda", 0.0}}, json{{"F_ext", 0.2}}},
        {"rlc_series", json::object(), json{{"R", 0.0}},
         json{{"V_ext", 0.5}, {"V_freq", 1.0}}},
        {"reactor_psi", json::object(), json{{"rate_matrix", {{0.0}}}}, json{{"P_H", 0.05}}},
        {"reactor_N", json::object(), json{{"rate_matrix", {{0.0}}}}, json{{"P_H", 0.05}}},
        {"chem_piston", json::object(), json{{"lambda", 0.0}, {"rate_matrix", {{0.0}}}},
         json()},
        {"membrane", json::object(), json{{"g1", {0.0}}, {"g2", {0.0}}}, json()},
        {"membrane_reacting", json::object(),
         json{{"g1", {0.0, 0.0}}, {"g2", {0.0, 0.0}}, {"rate_matrix_m", {{0.0}}}}, json()},
        {"two_piston", json::object(),
         json{{"lambda1", 0.0}, {"lambda2", 0.0}, {"kappa", 0.0}},
         json{{"source_T", 1.2}, {"source_kappa", 0.3}}},
        {"rlc_network", json::object(),
         json{{"R1", 0.0}, {"R2", 0.0}, {"R3", 0.0}, {"kappa12", 0.0}, {"kappa13", 0.0},
              {"kappa23", 0.0}},
         json{{"V_ext", 0.3}, {"V_freq", 1.0}}},
    };
    return list;
}

Trajectory run_ode(const std::string& name, const json& params, const IntegratorConfig& cfg) {
    ModelRuntime rt = build(name, params);
    return simulate(rt.rhs, rt.y0, cfg, rt.hooks);
}

// ---------------------------------------------------------------------------

void criterion_1_first_law() {
    bool ok = true;
    for (const OdeScenario& sc : ode_scenarios()) {
        const Trajectory traj = run_ode(sc.name, sc.isolated, rk4_config());
        const double res = energy_audit(traj);
        detail(sc.name + " isolated: energy residual " + fmt(res));
        if (!(res <= 1e-6)) ok = false;
        if (!sc.driven.is_null() && !sc.driven.empty()) {
            const Trajectory drv = run_ode(sc.name, sc.driven, rk4_config());
            const double res_d = energy_audit(drv);
            detail(sc.name + " driven:   energy residual " + fmt(res_d));
            if (!(res_d <= 1e-6)) ok = false;
        }
    }
    criterion(1, "first law, discrete (energy audit <= 1e-6 relative)", ok);
}

void criterion_2_second_law() {
    bool ok = true;
    for (const OdeScenario& sc : ode_scenarios()) {
        const Trajectory traj = run_ode(sc.name, sc.isolated, rk4_config(10.0, 1e-3, 10));
        const double lo = second_law_audit(traj);
        if (!(lo >= -1e-12)) {
            detail(sc.name + ": min production " + fmt(lo));
            ok = false;
        }

        ModelRuntime rev = build(sc.name, sc.reversible);
        const Trajectory rtraj = simulate(rev.rhs, rev.y0, rk4_config(10.0, 1e-3, 10), rev.hooks);
        const Vec S0 = rev.entropies(rtraj.front().y);
        double drift = 0.0;
        for (const Sample& s : rtraj.samples)
            drift = std::max(drift, (rev.entropies(s.y) - S0).cwiseAbs().maxCoeff());
        detail(sc.name + ": reversible S_A drift " + fmt(drift));
        if (!(drift <= 1e-10)) ok = false;
    }
    // Continuum runs.
    for (const std::string name : {"nsf1d", "multicomponent1d"}) {
        ModelRuntime rt = build(name);
        rt.config.t_end = 1.0;
        const Trajectory traj = simulate(rt.rhs, rt.y0, rt.config, rt.hooks);
        const double lo = second_law_audit(traj);
        detail(name + ": min pointwise production " + fmt(lo));
        if (!(lo >= -1e-12)) ok = false;
    }
    criterion(2, "second law, discrete and continuum (production >= -1e-12)", ok);
}

void criterion_3_two_piston() {
    bool ok = true;
    IntegratorConfig cfg;
    cfg.method = IntegratorConfig::Method::rk45;
    cfg.dt = 1e-3;
    cfg.t_end = 400.0;
    cfg.record_every = 5;

    {
        ModelRuntime rt = build("two_piston");  // diathermic default kappa = 2
        const Trajectory traj = simulate(rt.rhs, rt.y0, cfg, rt.hooks);
        const EquilibriumReport eq = equilibrium_report(traj, rt.equilibrium_thresholds);
        const double gap_T = traj.back().diag.get("gap_T_rel");
        const double gap_v = traj.back().diag.get("gap_v");
        detail("diathermic: |T1-T2|/mean " + fmt(gap_T) + ", |dx/dt| " + fmt(gap_v) +
               (eq.found ? ", equilibrium at t = " + fmt(eq.t_star) : ", no equilibrium"));
        if (!eq.found || !(gap_T <= 1e-4) || !(gap_v <= 1e-4)) ok = false;
    }
    {
        ModelRuntime rt = build("two_piston", json{{"kappa", 0.0}});
        const Trajectory traj = simulate(rt.rhs, rt.y0, cfg, rt.hooks);
        const EquilibriumReport eq = equilibrium_report(traj, rt.equilibrium_thresholds);
        const double gap_T = traj.back().diag.get("gap_T_rel");
        const double gap_v = traj.back().diag.get("gap_v");
        const double gap_p = traj.back().diag.get("gap_p_rel");
        detail("adiabatic:  |T1-T2|/mean " + fmt(gap_T) + ", |dx/dt| " + fmt(gap_v) +
               ", pressure gap " + fmt(gap_p));
        if (!eq.found || !(gap_v <= 1e-4) || !(gap_p <= 1e-4) || !(gap_T > 1e-2)) ok = false;
    }
    criterion(3, "two-piston equilibration: diathermic closes, adiabatic keeps the gap", ok);
}

void criterion_4_formulation_equivalence() {
    const IntegratorConfig cfg = rk4_config(10.0, 1e-3, 10);
    ModelRuntime psi = build("reactor_psi");
    ModelRuntime nn = build("reactor_N");
    const Trajectory a = simulate(psi.rhs, psi.y0, cfg, psi.hooks);
    const Trajectory b = simulate(nn.rhs, nn.y0, cfg, nn.hooks);
    bool ok = a.size() == b.size();
    double worst = 0.0;
    if (ok) {
        for (std::size_t k = 0; k < a.size(); ++k)
            for (int I = 1; I <= 2; ++I)
                worst = std::max(worst,
                                 std::abs(a.samples[k].diag.get("N_" + std::to_string(I)) -
                                          b.samples[k].diag.get("N_" + std::to_string(I))));
        ok = worst <= 1e-8;
    }
    detail("max |N_I(psi-run) - N_I(N-run)| = " + fmt(worst));
    criterion(4, "chemical formulation equivalence (<= 1e-8 on all N_I(t))", ok);
}

void criterion_5_mass_conservation() {
    bool ok = true;
    for (const std::string name : {"reactor_psi", "reactor_N", "chem_piston",
                                   "membrane_reacting"}) {
        const Trajectory traj = run_ode(name, json::object(), rk4_config(10.0, 1e-3, 10));
        const double drift = mass_audit(traj);
        detail(name + ": mass drift " + fmt(drift));
        if (!(drift <= 1e-10)) ok = false;
    }
    {
        ModelRuntime rt = build("multicomponent1d");
        rt.config.t_end = 1.0;
        const Trajectory traj = simulate(rt.rhs, rt.y0, rt.config, rt.hooks);
        const double drift = mass_audit(traj);
        detail("multicomponent1d: mass drift " + fmt(drift));
        if (!(drift <= 1e-10)) ok = false;
    }
    criterion(5, "mass conservation on reacting runs (<= 1e-10)", ok);
}

void criterion_6_membrane_isolation() {
    bool ok = true;
    for (const std::string name : {"membrane", "membrane_reacting"}) {
        const Trajectory traj = run_ode(name, json::object(), rk4_config(20.0, 1e-3, 10));
        const double e_res = energy_audit(traj);
        const double lo = second_law_audit(traj);
        const double gap_mu = traj.back().diag.get("gap_mu");
        detail(name + ": dU residual " + fmt(e_res) + ", min production " + fmt(lo) +
               ", final potential gap " + fmt(gap_mu));
        if (!(e_res <= 1e-8) || !(lo >= -1e-12) || !(gap_mu <= 1e-3)) ok = false;
    }
    criterion(6, "membrane isolation: dU/dt = 0, S nondecreasing, potentials equalize", ok);
}

void criterion_7_continuum_nsf() {
    bool ok = true;
    // Uniform state is an exact discrete fixed point.
    {
        ModelRuntime rt = build("nsf1d", json::object(), json{{"v_amp", 0.0}});
        const Vec dy = rt.rhs(0.0, rt.y0);
        const double norm = dy.cwiseAbs().maxCoeff();
        detail("uniform fixed point: max |dy| = " + fmt(norm));
        if (norm != 0.0) ok = false;
    }
    // Viscous decay: energy conserved to 1e-4 at 128 cells, improving >= 4x
    // when dx and dt are halved, entropy nondecreasing within -1e-10.
    auto decay = [&](int cells, double dt) {
        ModelRuntime rt = build("nsf1d", json{{"n_cells", cells}});
        rt.config.dt = dt;
        rt.config.t_end = 2.0;
        rt.config.record_every = 10;
        const Trajectory traj = simulate(rt.rhs, rt.y0, rt.config, rt.hooks);
        double drift = 0.0;
        bool monotone = true;
        const double E0 = traj.front().diag.E;
        double S_prev = -std::numeric_limits<double>::infinity();
        for (const Sample& s : traj.samples) {
            drift = std::max(drift, std::abs(s.diag.E - E0) / std::abs(E0));
            if (s.diag.S_total < S_prev - 1e-10) monotone = false;
            S_prev = s.diag.S_total;
        }
        return std::make_pair(drift, monotone);
    };
    const auto [drift128, mono128] = decay(128, 2e-4);
    const auto [drift256, mono256] = decay(256, 1e-4);
    const double ratio = drift128 / drift256;
    detail("viscous decay 128 cells: energy drift " + fmt(drift128) +
           (mono128 ? ", entropy nondecreasing" : ", entropy NOT monotone"));
    detail("viscous decay 256 cells: energy drift " + fmt(drift256) + ", improvement " +
           fmt(ratio) + "x");
    if (!(drift128 <= 1e-4) || !(ratio >= 4.0) || !mono128 || !mono256) ok = false;
    criterion(7, "continuum NSF: exact uniform fixed point, 2nd-order energy conservation",
              ok);
}

void criterion_8_continuum_multicomponent() {
    ModelRuntime rt = build("multicomponent1d");
    rt.config.t_end = 2.0;
    rt.config.record_every = 5;
    const Trajectory traj = simulate(rt.rhs, rt.y0, rt.config, rt.hooks);
    const double mass_drift = mass_audit(traj);
    double i_min = std::numeric_limits<double>::infinity();
    for (const Sample& s : traj.samples) i_min = std::min(i_min, s.diag.get("i_min"));
    detail("closed box: mass drift " + fmt(mass_drift) + ", min cell production " +
           fmt(i_min));
    criterion(8, "continuum multicomponent: mass to 1e-12 and i >= -1e-12 per cell",
              mass_drift <= 1e-12 && i_min >= -1e-12);
}

void criterion_9_gradient_checks() {
    bool ok = true;
    const std::vector<std::string> names = {
        "one_cylinder", "mass_spring", "rlc_series",  "reactor_psi",
        "chem_piston",  "membrane",    "membrane_reacting", "two_piston",
        "rlc_network",  "nsf1d",       "multicomponent1d"};
    for (const std::string& name : names) {
        ModelRuntime rt = build(name);
        double err = 0.0;
        if (rt.gradient_check_fn) err = rt.gradient_check_fn(100, 0xC0FFEE + name.size());
        detail(name + ": max relative gradient error " + fmt(err));
        if (!(err <= 1e-6)) ok = false;
    }
    // Temperature-primitive two-piston carries the heat-capacity symmetry check.
    {
        ModelRuntime fe = build("two_piston", json{{"formulation", "free_energy"}});
        const double err = fe.gradient_check_fn(100, 0xFEED);
        detail("two_piston (free energy): max relative gradient error " + fmt(err));
        if (!(err <= 1e-6)) ok = false;
    }
    criterion(9, "gradient checks: analytic partials vs central differences (<= 1e-6)", ok);
}

void criterion_10_structural_identities() {
    bool ok = true;
    {
        Mat kappa = Mat::Zero(3, 3);
        kappa(0, 1) = kappa(1, 0) = 1.25;
        kappa(0, 2) = kappa(2, 0) = 0.5;
        kappa(1, 2) = kappa(2, 1) = 2.0;
        const Mat J = friction_matrix(kappa);
        for (int B = 0; B < 3; ++B)
            if (J.col(B).sum() != 0.0) ok = false;
        detail(std::string("friction matrix column sums exactly zero: ") +
               (ok ? "yes" : "no"));
    }
    {
        // Antisymmetry of the internal flow matrix, checked on a raw model.
        NetworkModel m;
        m.n_sub = 2;
        m.dim = 1;
        Mat kappa = Mat::Zero(2, 2);
        kappa(0, 1) = kappa(1, 0) = 0.8;
        m.kappa = kappa;
        m.lagrangian = [](const Vec&, const Vec& v, const Vec& S) {
            return 0.5 * v[0] * v[0] - 1.3 * S[0] - 0.9 * S[1];
        };
        m.dL_dS = [](const Vec&, const Vec&, const Vec&) {
            return (Vec(2) << -1.3, -0.9).finished();
        };
        NetworkState s;
        s.q = Vec::Zero(1);
        s.v = Vec::Zero(1);
        s.S = Vec::Zero(2);
        const HeatFlows flows = heat_flows(m, s);
        const bool antisym =
            (flows.internal + flows.internal.transpose()).cwiseAbs().maxCoeff() == 0.0;
        detail(std::string("heat-flow matrix exactly antisymmetric: ") +
               (antisym ? "yes" : "no"));
        if (!antisym) ok = false;
    }
    {
        bool rejected_asym = false, rejected_npsd = false;
        Phenomenology phen;
        phen.onsager_vector = (Mat(2, 2) << 1.0, 0.5, -0.5, 1.0).finished();
        try {
            phen.validate(Vec::Ones(1), 1, 0);
        } catch (const InvalidOnsager&) {
            rejected_asym = true;
        }
        phen.onsager_vector = (Mat(2, 2) << 1.0, 2.0, 2.0, 1.0).finished();
        try {
            phen.validate(Vec::Ones(1), 1, 0);
        } catch (const InvalidOnsager&) {
            rejected_npsd = true;
        }
        detail(std::string("Onsager validation rejects non-symmetric: ") +
               (rejected_asym ? "yes" : "no") + ", non-PSD: " + (rejected_npsd ? "yes" : "no"));
        if (!rejected_asym || !rejected_npsd) ok = false;
    }
    criterion(10, "structural identities: column sums, antisymmetry, Onsager validation", ok);
}

}  // namespace

int main() {
    std::printf("=== varitherm acceptance suite ===\n");
    try {
        criterion_1_first_law();
        criterion_2_second_law();
        criterion_3_two_piston();
        criterion_4_formulation_equivalence();
        criterion_5_mass_conservation();
        criterion_6_membrane_isolation();
        criterion_7_continuum_nsf();
        criterion_8_continuum_multicomponent();
        criterion_9_gradient_checks();
        criterion_10_structural_identities();
    } catch (const std::exception& e) {
        std::printf("[FAIL] suite aborted: %s\n", e.what());
        return 1;
    }
    std::printf("=== %s (%d criterion failure%s) ===\n",
                g_failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES", g_failures,
                g_failures == 1 ? "" : "s");
    return g_failures == 0 ? 0 : 1;
}
