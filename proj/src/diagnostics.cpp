#include "varitherm/diagnostics.hpp"

#include <cmath>
#include <random>

namespace varitherm {

double energy_audit(const Trajectory& traj) {
    if (traj.size() < 2) throw InsufficientSamples("energy audit needs >= 2 samples");
    const double E0 = traj.front().diag.E;
    const double scale = std::max(1.0, std::abs(E0));
    double integral = 0.0;
    double worst = 0.0;
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const Sample& a = traj.samples[k - 1];
        const Sample& b = traj.samples[k];
        const double pa = a.diag.P_W + a.diag.P_H;
        const double pb = b.diag.P_W + b.diag.P_H;
        integral += 0.5 * (pa + pb) * (b.t - a.t);
        worst = std::max(worst, std::abs(b.diag.E - E0 - integral) / scale);
    }
    return worst;
}

double second_law_audit(const Trajectory& traj) {
    if (traj.empty()) throw InsufficientSamples("second-law audit needs samples");
    double lo = std::numeric_limits<double>::infinity();
    for (const Sample& s : traj.samples)
        lo = std::min(lo, s.diag.has("i_min") ? s.diag.get("i_min") : s.diag.I);
    return lo;
}

double mass_audit(const Trajectory& traj) {
    if (traj.empty()) throw InsufficientSamples("mass audit needs samples");
    if (!traj.front().diag.has("mass")) return 0.0;
    const double m0 = traj.front().diag.get("mass");
    double worst = 0.0;
    for (const Sample& s : traj.samples)
        worst = std::max(worst, std::abs(s.diag.get("mass") - m0));
    return worst;
}

bool entropy_monotone(const Trajectory& traj, double floor) {
    for (std::size_t k = 1; k < traj.size(); ++k)
        if (traj.samples[k].diag.S_total - traj.samples[k - 1].diag.S_total < floor) return false;
    return true;
}

bool reversibility_check(const NetworkModel& model) {
    if (model.dissipation) {
        const DissipationInfo& d = *model.dissipation;
        return d.friction_zero && d.kappa_zero && d.sources_matched;
    }
    // Probe at seeded random states.
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 32; ++trial) {
        Vec q(model.dim), v(model.dim), S(model.n_sub);
        for (int i = 0; i < model.dim; ++i) {
            q[i] = unit(rng);
            v[i] = unit(rng);
            if (!model.domain.empty())
                q[i] = std::clamp(q[i], model.domain.lo[i] + 1e-3, model.domain.hi[i] - 1e-3);
        }
        for (int A = 0; A < model.n_sub; ++A) S[A] = 0.5 * unit(rng);
        Vec T;
        try {
            T = model.temperatures(q, v, S);
        } catch (const DomainError&) {
            continue;
        }
        for (int A = 0; A < model.n_sub; ++A)
            if (model.friction(A, q, v, S).cwiseAbs().maxCoeff() > 0.0) return false;
        if (model.conductivity(q, S).cwiseAbs().maxCoeff() > 0.0) return false;
        for (const HeatSource& src : model.sources) {
            const Vec k = src.couplings(q, S, model.n_sub);
            const double T_R = src.temperature(0.0);
            for (int A = 0; A < model.n_sub; ++A)
                if (k[A] > 0.0 && std::abs(T_R - T[A]) > 1e-12) return false;
        }
    }
    return true;
}

EquilibriumReport equilibrium_report(const Trajectory& traj,
                                     const std::map<std::string, double>& thresholds,
                                     double default_threshold) {
    EquilibriumReport report;
    if (traj.empty()) return report;
    auto limit = [&](const std::string& name) {
        const auto it = thresholds.find(name);
        return it != thresholds.end() ? it->second : default_threshold;
    };
    // A nonempty thresholds map names the monitored gaps; otherwise every
    // recorded gap_* extra is monitored at the default threshold.
    auto monitored = [&](const std::string& key) {
        return thresholds.empty() || thresholds.count(key) > 0;
    };
    for (const Sample& s : traj.samples) {
        bool all_below = true;
        bool any_gap = false;
        for (const auto& [key, value] : s.diag.extra) {
            if (key.rfind("gap_", 0) != 0 || !monitored(key)) continue;
            any_gap = true;
            if (std::abs(value) > limit(key)) {
                all_below = false;
                break;
            }
        }
        if (any_gap && all_below) {
            report.found = true;
            report.t_star = s.t;
            break;
        }
    }
    for (const auto& [key, value] : traj.back().diag.extra)
        if (key.rfind("gap_", 0) == 0) report.final_gaps.emplace_back(key, value);
    return report;
}

namespace {

Vec sample_uniform(std::mt19937_64& rng, const Vec& lo, const Vec& hi) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vec x(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i) x[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
    return x;
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

double rel_err(const Vec& a, const Vec& b) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) worst = std::max(worst, rel_err(a[i], b[i]));
    return worst;
}

}  // namespace

double gradient_check(const SimpleModel& model, const SamplingBox& box, int n_states,
                      std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int k = 0; k < n_states; ++k) {
        const Vec q = sample_uniform(rng, box.q_lo, box.q_hi);
        const Vec v = sample_uniform(rng, box.v_lo, box.v_hi);
        const double S = sample_uniform(rng, box.S_lo, box.S_hi)[0];
        auto L = [&](const Vec& qq, const Vec& vv, double ss) {
            return model.lagrangian(qq, vv, ss);
        };
        if (model.dL_dq)
            worst = std::max(worst, rel_err(model.dL_dq(q, v, S),
                                            fd::gradient([&](const Vec& x) { return L(x, v, S); }, q)));
        if (model.dL_dv)
            worst = std::max(worst, rel_err(model.dL_dv(q, v, S),
                                            fd::gradient([&](const Vec& x) { return L(q, x, S); }, v)));
        if (model.dL_dS)
            worst = std::max(worst, rel_err(model.dL_dS(q, v, S),
                                            fd::partial([&](double x) { return L(q, v, x); }, S)));
        if (model.d2L_dv2 && model.dL_dv)
            worst = std::max(
                worst, (model.d2L_dv2(q, v, S) -
                        fd::jacobian([&](const Vec& x) { return model.dL_dv(q, x, S); }, v))
                               .cwiseAbs()
                               .maxCoeff() /
                           std::max(1.0, model.d2L_dv2(q, v, S).cwiseAbs().maxCoeff()));
    }
    return worst;
}

double gradient_check(const NetworkModel& model, const SamplingBox& box, int n_states,
                      std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int k = 0; k < n_states; ++k) {
        const Vec q = sample_uniform(rng, box.q_lo, box.q_hi);
        const Vec v = sample_uniform(rng, box.v_lo, box.v_hi);
        const Vec S = sample_uniform(rng, box.S_lo, box.S_hi);
        if (model.dL_dq)
            worst = std::max(worst,
                             rel_err(model.dL_dq(q, v, S),
                                     fd::gradient(
                                         [&](const Vec& x) { return model.lagrangian(x, v, S); }, q)));
        if (model.dL_dv)
            worst = std::max(worst,
                             rel_err(model.dL_dv(q, v, S),
                                     fd::gradient(
                                         [&](const Vec& x) { return model.lagrangian(q, x, S); }, v)));
        if (model.dL_dS)
            worst = std::max(worst,
                             rel_err(model.dL_dS(q, v, S),
                                     fd::gradient(
                                         [&](const Vec& x) { return model.lagrangian(q, v, x); }, S)));
    }
    return worst;
}

double gradient_check(const FreeEnergyModel& model, const SamplingBox& box, int n_states,
                      std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int k = 0; k < n_states; ++k) {
        const Vec q = sample_uniform(rng, box.q_lo, box.q_hi);
        const Vec v = sample_uniform(rng, box.v_lo, box.v_hi);
        const Vec T = sample_uniform(rng, box.S_lo, box.S_hi);  // box holds T range here
        if (model.dLf_dq)
            worst = std::max(
                worst, rel_err(model.dLf_dq(q, v, T),
                               fd::gradient(
                                   [&](const Vec& x) { return model.free_lagrangian(x, v, T); }, q)));
        if (model.dLf_dT)
            worst = std::max(
                worst, rel_err(model.dLf_dT(q, v, T),
                               fd::gradient(
                                   [&](const Vec& x) { return model.free_lagrangian(q, v, x); }, T)));
        const Mat C = model.capacity(q, v, T);
        const double asym = (C - C.transpose()).cwiseAbs().maxCoeff() /
                            std::max(1.0, C.cwiseAbs().maxCoeff());
        worst = std::max(worst, asym);
    }
    return worst;
}

AuditReport run_audits(const Trajectory& traj, const AuditThresholds& thresholds,
                       bool check_energy, bool check_second_law, bool check_mass) {
    AuditReport report;
    if (check_energy) {
        report.max_energy_residual = energy_audit(traj);
        if (report.max_energy_residual > thresholds.energy_rel) {
            report.passed = false;
            report.notes.push_back("energy residual above threshold");
        }
    }
    if (check_second_law) {
        report.min_internal_production = second_law_audit(traj);
        if (report.min_internal_production < thresholds.production_floor) {
            report.passed = false;
            report.notes.push_back("internal production below floor");
        }
        report.entropy_monotone = varitherm::entropy_monotone(traj, thresholds.production_floor);
    }
    if (check_mass) {
        report.mass_residual = mass_audit(traj);
        if (report.mass_residual > thresholds.mass_abs) {
            report.passed = false;
            report.notes.push_back("mass drift above threshold");
        }
    }
    return report;
}

void write_audit_report(std::ostream& os, const AuditReport& report) {
    os.precision(17);
    os << "max_energy_residual = " << report.max_energy_residual << "\n";
    os << "min_internal_production = " << report.min_internal_production << "\n";
    os << "entropy_monotone = " << (report.entropy_monotone ? "true" : "false") << "\n";
    os << "mass_residual = " << report.mass_residual << "\n";
    if (report.equilibrium_time)
        os << "equilibrium_time = " << *report.equilibrium_time << "\n";
    else
        os << "equilibrium_time = none\n";
    for (const auto& [name, value] : report.equilibrium_gaps)
        os << name << " = " << value << "\n";
    os << "passed = " << (report.passed ? "true" : "false") << "\n";
    for (const std::string& note : report.notes) os << "note = " << note << "\n";
}

}  // namespace varitherm
