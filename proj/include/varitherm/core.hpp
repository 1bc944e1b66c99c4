#pragma once

#include <functional>
#include <string>

#include "varitherm/fd.hpp"
#include "varitherm/linalg.hpp"

namespace varitherm {

/// Per-coordinate admissible box for configuration variables. Empty = unbounded.
struct Box {
    Vec lo, hi;

    static Box unbounded(int n) {
        Box b;
        b.lo = Vec::Constant(n, -std::numeric_limits<double>::infinity());
        b.hi = Vec::Constant(n, std::numeric_limits<double>::infinity());
        return b;
    }
    bool empty() const { return lo.size() == 0; }
    bool contains(const Vec& q) const {
        if (empty()) return true;
        for (Eigen::Index i = 0; i < q.size(); ++i)
            if (!(q[i] > lo[i] && q[i] < hi[i])) return false;
        return true;
    }
};

/// State of a simple closed system: configuration, velocity, one entropy.
struct SimpleState {
    Vec q, v;
    double S = 0.0;
    double t = 0.0;
};

struct SimpleDeriv {
    Vec dq, dv;
    double dS = 0.0;
};

/// A simple closed thermodynamic system: Lagrangian L(q, v, S) plus force laws
/// and external heat power. Analytic partials are optional; central finite
/// differences are used where they are absent. Immutable after construction.
struct SimpleModel {
    int dim = 1;
    std::string name;

    std::function<double(const Vec& q, const Vec& v, double S)> lagrangian;

    // Optional analytic partials of L.
    std::function<Vec(const Vec&, const Vec&, double)> dL_dq;
    std::function<Vec(const Vec&, const Vec&, double)> dL_dv;
    std::function<double(const Vec&, const Vec&, double)> dL_dS;
    std::function<Mat(const Vec&, const Vec&, double)> d2L_dv2;   // mass matrix
    std::function<Mat(const Vec&, const Vec&, double)> d2L_dvdq;  // rows: v, cols: q
    std::function<Vec(const Vec&, const Vec&, double)> d2L_dvdS;

    // Force laws; empty std::function means identically zero.
    std::function<Vec(const Vec&, const Vec&, double)> friction_force;
    std::function<Vec(const Vec&, const Vec&, double, double)> external_force;
    std::function<double(const Vec&, const Vec&, double, double)> heat_power;

    Box domain;  // admissible box for q

    Vec grad_q(const Vec& q, const Vec& v, double S) const;
    Vec grad_v(const Vec& q, const Vec& v, double S) const;
    double grad_S(const Vec& q, const Vec& v, double S) const;
    Mat mass_matrix(const Vec& q, const Vec& v, double S) const;
    Mat cross_vq(const Vec& q, const Vec& v, double S) const;
    Vec cross_vS(const Vec& q, const Vec& v, double S) const;

    Vec friction(const Vec& q, const Vec& v, double S) const;
    Vec external(const Vec& q, const Vec& v, double S, double t) const;
    double heat(const Vec& q, const Vec& v, double S, double t) const;
};

/// Throws DomainViolation / DimensionMismatch when the state is not admissible.
void check_admissible(const SimpleModel& model, const SimpleState& state);

/// T = -dL/dS. Throws NonPositiveTemperature when T <= 0.
double temperature(const SimpleModel& model, const SimpleState& state);

/// E = <dL/dv, v> - L.
double energy(const SimpleModel& model, const SimpleState& state);

/// I = -(1/T) <F_fr, v>. Exactly zero for a zero friction law.
double internal_production(const SimpleModel& model, const SimpleState& state);

/// Evolution vector field of the coupled mechanical-thermal system:
///   d/dt dL/dv - dL/dq = F_ext + F_fr,   dL/dS * dS/dt = <F_fr, v> - P_H.
/// The entropy equation is solved explicitly for dS/dt, then the velocity
/// equation is solved against the mass matrix (with chain-rule cross terms).
SimpleDeriv simple_rhs(const SimpleModel& model, const SimpleState& state);

}  // namespace varitherm
