#include "varitherm/integrate.hpp"

#include <algorithm>
#include <cmath>

namespace varitherm {

void IntegratorConfig::validate() const {
    if (!(dt > 0.0)) throw InvariantViolation("integrator: dt must be positive");
    if (!(t_end > t_start)) throw InvariantViolation("integrator: t_end must exceed t_start");
    if (!(tol_rel > 0.0) || !(tol_abs > 0.0))
        throw InvariantViolation("integrator: tolerances must be positive");
    if (!(dt_min > 0.0) || !(dt_max >= dt_min))
        throw InvariantViolation("integrator: invalid dt bounds");
    if (record_every < 1) throw InvariantViolation("integrator: record_every must be >= 1");
}

bool DiagRecord::has(const std::string& key) const {
    for (const auto& [k, v] : extra)
        if (k == key) return true;
    return false;
}

double DiagRecord::get(const std::string& key) const {
    for (const auto& [k, v] : extra)
        if (k == key) return v;
    throw Error("diagnostics record has no entry '" + key + "'");
}

void DiagRecord::set(const std::string& key, double value) {
    for (auto& [k, v] : extra) {
        if (k == key) {
            v = value;
            return;
        }
    }
    extra.emplace_back(key, value);
}

Vec step_fixed(const Rhs& rhs, double t, const Vec& y, double dt) {
    try {
        const Vec k1 = rhs(t, y);
        const Vec k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1);
        const Vec k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2);
        const Vec k4 = rhs(t + dt, y + dt * k3);
        return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const DomainError& e) {
        throw StepRejected(std::string("stage left the admissible domain: ") + e.what());
    }
}

namespace {

// Dormand-Prince 4(5) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

double weighted_error(const Vec& err, const Vec& y0, const Vec& y1, double tol_rel,
                      double tol_abs) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = tol_abs + tol_rel * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = err[i] / sc;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(err.size(), 1)));
}

}  // namespace

AdaptiveResult step_adaptive(const Rhs& rhs, double t, const Vec& y, double dt_try,
                             double tol_rel, double tol_abs, double dt_min, double dt_max,
                             AdaptiveController& ctl) {
    AdaptiveResult res;
    res.dt_used = dt_try;
    try {
        const Vec k1 = rhs(t, y);
        const Vec k2 = rhs(t + 0.2 * dt_try, y + dt_try * (a21 * k1));
        const Vec k3 = rhs(t + 0.3 * dt_try, y + dt_try * (a31 * k1 + a32 * k2));
        const Vec k4 = rhs(t + 0.8 * dt_try, y + dt_try * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vec k5 =
            rhs(t + 8.0 / 9.0 * dt_try, y + dt_try * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vec k6 =
            rhs(t + dt_try, y + dt_try * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vec y5 = y + dt_try * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Vec k7 = rhs(t + dt_try, y5);
        const Vec err =
            dt_try * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        res.err_norm = weighted_error(err, y, y5, tol_rel, tol_abs);
        if (res.err_norm <= 1.0) {
            res.accepted = true;
            res.y = y5;
            const double err_clip = std::max(res.err_norm, 1e-10);
            double fac = 0.9 * std::pow(err_clip, -0.17) * std::pow(ctl.prev_err, 0.04);
            fac = std::clamp(fac, 0.2, 5.0);
            res.dt_next = std::clamp(dt_try * fac, dt_min, dt_max);
            ctl.prev_err = err_clip;
        } else {
            res.accepted = false;
            res.y = y;
            const double fac = std::clamp(0.9 * std::pow(res.err_norm, -0.2), 0.1, 0.9);
            res.dt_next = std::max(dt_try * fac, dt_min);
        }
        return res;
    } catch (const DomainError&) {
        res.accepted = false;
        res.y = y;
        res.err_norm = std::numeric_limits<double>::infinity();
        res.dt_next = std::max(0.5 * dt_try, dt_min);
        return res;
    }
}

namespace {

// Advance a fixed RK4 step, bisecting on rejection until dt underflows dt_min.
Vec advance_fixed(const Rhs& rhs, double t, const Vec& y, double dt, double dt_min) {
    try {
        return step_fixed(rhs, t, y, dt);
    } catch (const StepRejected& e) {
        if (0.5 * dt < dt_min)
            throw IntegrationError(std::string("step rejected at dt_min: ") + e.what(), t);
        const Vec mid = advance_fixed(rhs, t, y, 0.5 * dt, dt_min);
        return advance_fixed(rhs, t + 0.5 * dt, mid, 0.5 * dt, dt_min);
    }
}

}  // namespace

namespace {

Trajectory simulate_impl(const Rhs& rhs, const Vec& y0, const IntegratorConfig& config,
                         const SimHooks& hooks, Trajectory& traj) {
    auto record = [&](double t, const Vec& y) {
        if (!y.allFinite())
            throw IntegrationError("state has non-finite entries", t);
        Sample s;
        s.t = t;
        s.y = y;
        if (hooks.diagnostics) s.diag = hooks.diagnostics(t, y);
        traj.samples.push_back(std::move(s));
        return hooks.stop && hooks.stop(t, y, traj.samples.back().diag);
    };

    double t = config.t_start;
    Vec y = y0;
    if (record(t, y)) return traj;

    const double t_eps = 1e-12 * std::max(1.0, std::abs(config.t_end));
    long steps = 0;
    long since_record = 0;

    if (config.method == IntegratorConfig::Method::rk4) {
        while (t < config.t_end - t_eps) {
            const double dt = std::min(config.dt, config.t_end - t);
            y = advance_fixed(rhs, t, y, dt, config.dt_min);
            t += dt;
            ++steps;
            ++since_record;
            if (!y.allFinite()) throw IntegrationError("state has non-finite entries", t);
            if (since_record >= config.record_every || t >= config.t_end - t_eps) {
                since_record = 0;
                if (record(t, y)) return traj;
            }
            if (steps > config.max_steps) throw MaxStepsExceeded();
        }
    } else {
        AdaptiveController ctl;
        double dt_try = std::clamp(config.dt, config.dt_min, config.dt_max);
        while (t < config.t_end - t_eps) {
            const double dt_capped = std::min(dt_try, config.t_end - t);
            const AdaptiveResult r = step_adaptive(rhs, t, y, dt_capped, config.tol_rel,
                                                   config.tol_abs, config.dt_min, config.dt_max, ctl);
            if (r.accepted) {
                y = r.y;
                t += r.dt_used;
                ++since_record;
                if (!y.allFinite()) throw IntegrationError("state has non-finite entries", t);
                if (since_record >= config.record_every || t >= config.t_end - t_eps) {
                    since_record = 0;
                    if (record(t, y)) return traj;
                }
            } else if (r.dt_next <= config.dt_min * (1.0 + 1e-12) && r.err_norm > 1.0 &&
                       dt_capped <= config.dt_min * (1.0 + 1e-12)) {
                throw IntegrationError("adaptive step rejected at dt_min", t);
            }
            dt_try = r.dt_next;
            ++steps;
            if (steps > config.max_steps) throw MaxStepsExceeded();
        }
    }
    return traj;
}

}  // namespace

Trajectory simulate(const Rhs& rhs, const Vec& y0, const IntegratorConfig& config,
                    const SimHooks& hooks) {
    config.validate();
    Trajectory traj;
    try {
        return simulate_impl(rhs, y0, config, hooks, traj);
    } catch (IntegrationError& e) {
        // Keep the trajectory up to the last valid sample for the caller.
        e.partial = std::make_shared<Trajectory>(std::move(traj));
        throw;
    }
}

}  // namespace varitherm
