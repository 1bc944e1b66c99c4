#include "varitherm/core.hpp"

#include <sstream>

namespace varitherm {

Vec SimpleModel::grad_q(const Vec& q, const Vec& v, double S) const {
    if (dL_dq) return dL_dq(q, v, S);
    return fd::gradient([&](const Vec& qq) { return lagrangian(qq, v, S); }, q);
}

Vec SimpleModel::grad_v(const Vec& q, const Vec& v, double S) const {
    if (dL_dv) return dL_dv(q, v, S);
    return fd::gradient([&](const Vec& vv) { return lagrangian(q, vv, S); }, v);
}

double SimpleModel::grad_S(const Vec& q, const Vec& v, double S) const {
    if (dL_dS) return dL_dS(q, v, S);
    return fd::partial([&](double s) { return lagrangian(q, v, s); }, S);
}

Mat SimpleModel::mass_matrix(const Vec& q, const Vec& v, double S) const {
    if (d2L_dv2) return d2L_dv2(q, v, S);
    if (dL_dv)
        return fd::jacobian([&](const Vec& vv) { return dL_dv(q, vv, S); }, v);
    return fd::hessian([&](const Vec& vv) { return lagrangian(q, vv, S); }, v);
}

Mat SimpleModel::cross_vq(const Vec& q, const Vec& v, double S) const {
    if (d2L_dvdq) return d2L_dvdq(q, v, S);
    return fd::jacobian([&](const Vec& qq) { return grad_v(qq, v, S); }, q);
}

Vec SimpleModel::cross_vS(const Vec& q, const Vec& v, double S) const {
    if (d2L_dvdS) return d2L_dvdS(q, v, S);
    const double h = fd::step(S);
    return (grad_v(q, v, S + h) - grad_v(q, v, S - h)) / (2.0 * h);
}

Vec SimpleModel::friction(const Vec& q, const Vec& v, double S) const {
    if (friction_force) return friction_force(q, v, S);
    return Vec::Zero(dim);
}

Vec SimpleModel::external(const Vec& q, const Vec& v, double S, double t) const {
    if (external_force) return external_force(q, v, S, t);
    return Vec::Zero(dim);
}

double SimpleModel::heat(const Vec& q, const Vec& v, double S, double t) const {
    if (heat_power) return heat_power(q, v, S, t);
    return 0.0;
}

void check_admissible(const SimpleModel& model, const SimpleState& state) {
    if (state.q.size() != model.dim || state.v.size() != model.dim)
        throw DimensionMismatch("state dimension does not match model");
    if (!state.q.allFinite() || !state.v.allFinite() || !std::isfinite(state.S))
        throw DomainViolation("state has non-finite entries");
    if (!model.domain.contains(state.q)) {
        std::ostringstream oss;
        oss << "configuration outside admissible box";
        throw DomainViolation(oss.str());
    }
}

double temperature(const SimpleModel& model, const SimpleState& state) {
    check_admissible(model, state);
    const double T = -model.grad_S(state.q, state.v, state.S);
    if (!(T > 0.0)) throw NonPositiveTemperature();
    return T;
}

double energy(const SimpleModel& model, const SimpleState& state) {
    check_admissible(model, state);
    const Vec p = model.grad_v(state.q, state.v, state.S);
    return p.dot(state.v) - model.lagrangian(state.q, state.v, state.S);
}

double internal_production(const SimpleModel& model, const SimpleState& state) {
    if (!model.friction_force) return 0.0;
    const double T = temperature(model, state);
    return -model.friction(state.q, state.v, state.S).dot(state.v) / T;
}

SimpleDeriv simple_rhs(const SimpleModel& model, const SimpleState& state) {
    const double T = temperature(model, state);
    const Vec& q = state.q;
    const Vec& v = state.v;
    const double S = state.S;

    const Vec F_fr = model.friction(q, v, S);
    const Vec F_ext = model.external(q, v, S, state.t);
    const double P_H = model.heat(q, v, S, state.t);

    SimpleDeriv d;
    d.dq = v;
    // dL/dS * Sdot = <F_fr, v> - P_H, with dL/dS = -T.
    d.dS = (P_H - F_fr.dot(v)) / T;

    // d/dt dL/dv = M vdot + (d2L/dvdq) v + (d2L/dvdS) Sdot.
    Vec rhs = model.grad_q(q, v, S) + F_ext + F_fr;
    rhs -= model.cross_vq(q, v, S) * v;
    rhs -= model.cross_vS(q, v, S) * d.dS;
    const Mat M = model.mass_matrix(q, v, S);
    d.dv = solve_symmetric<SingularMassMatrix>(M, rhs);
    return d;
}

}  // namespace varitherm
