#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "varitherm/errors.hpp"
#include "varitherm/linalg.hpp"

namespace varitherm {

struct IntegratorConfig {
    enum class Method { rk4, rk45 };
    Method method = Method::rk4;
    double t_start = 0.0;
    double t_end = 10.0;
    double dt = 1e-3;        // fixed-step size, also the initial adaptive guess
    double tol_rel = 1e-8;   // adaptive only
    double tol_abs = 1e-10;  // adaptive only
    double dt_min = 1e-12;
    double dt_max = 1.0;
    int record_every = 1;    // output decimation in accepted steps
    long max_steps = 200000000L;

    void validate() const;
};

using Rhs = std::function<Vec(double t, const Vec& y)>;

/// Per-sample diagnostics: energy, external powers, internal production, total
/// entropy, plus ordered named extras (temperatures, gaps, per-term splits).
struct DiagRecord {
    double E = 0.0;
    double P_W = 0.0;
    double P_H = 0.0;
    double I = 0.0;
    double S_total = 0.0;
    std::vector<std::pair<std::string, double>> extra;

    bool has(const std::string& key) const;
    double get(const std::string& key) const;  // throws Error when absent
    void set(const std::string& key, double value);
};

struct Sample {
    double t = 0.0;
    Vec y;
    DiagRecord diag;
};

struct Trajectory {
    std::vector<Sample> samples;

    bool empty() const { return samples.empty(); }
    const Sample& front() const { return samples.front(); }
    const Sample& back() const { return samples.back(); }
    std::size_t size() const { return samples.size(); }
};

struct SimHooks {
    /// Computes the diagnostics record at a sample time. Required for audits;
    /// when absent, samples carry an empty record.
    std::function<DiagRecord(double t, const Vec& y)> diagnostics;
    /// Optional early stop; returning true ends the run after recording.
    std::function<bool(double t, const Vec& y, const DiagRecord& diag)> stop;
};

/// One classical 4-stage fourth-order step. Domain errors raised by the rhs at
/// any stage surface as StepRejected.
Vec step_fixed(const Rhs& rhs, double t, const Vec& y, double dt);

struct AdaptiveResult {
    Vec y;
    double dt_used = 0.0;
    double dt_next = 0.0;
    bool accepted = false;
    double err_norm = 0.0;
};

/// Controller state carried between adaptive steps (PI step-size control).
struct AdaptiveController {
    double prev_err = 1.0;
};

/// One embedded Dormand-Prince 4(5) attempt. The step is accepted when the
/// weighted error norm is <= 1; dt_next comes from a PI controller with
/// safety factor 0.9. A stage-level domain error rejects the attempt and
/// halves the step.
AdaptiveResult step_adaptive(const Rhs& rhs, double t, const Vec& y, double dt_try,
                             double tol_rel, double tol_abs, double dt_min, double dt_max,
                             AdaptiveController& ctl);

/// Integrate to t_end, recording decimated samples with diagnostics. Steps that
/// leave the admissible domain are bisected down to dt_min, then the run fails
/// with IntegrationError. Never records a sample with NaN/Inf entries.
Trajectory simulate(const Rhs& rhs, const Vec& y0, const IntegratorConfig& config,
                    const SimHooks& hooks = {});

}  // namespace varitherm
