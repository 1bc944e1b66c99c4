#include "varitherm/network.hpp"

namespace varitherm {

double HeatSource::temperature(double S_R) const {
    if (ideal()) return *T_fixed;
    if (dU_R) return dU_R(S_R);
    if (!U_R) throw Error("heat source has neither fixed temperature nor energy function");
    return fd::partial(U_R, S_R);
}

Vec HeatSource::couplings(const Vec& q, const Vec& S, int n_sub) const {
    Vec k = coupling_fn ? coupling_fn(q, S) : coupling;
    if (k.size() == 0) k = Vec::Zero(n_sub);
    if (k.size() != n_sub) throw DimensionMismatch("source coupling length != n_sub");
    return k;
}

Vec NetworkModel::grad_q(const Vec& q, const Vec& v, const Vec& S) const {
    if (dL_dq) return dL_dq(q, v, S);
    return fd::gradient([&](const Vec& qq) { return lagrangian(qq, v, S); }, q);
}

Vec NetworkModel::grad_v(const Vec& q, const Vec& v, const Vec& S) const {
    if (dL_dv) return dL_dv(q, v, S);
    return fd::gradient([&](const Vec& vv) { return lagrangian(q, vv, S); }, v);
}

Vec NetworkModel::grad_S(const Vec& q, const Vec& v, const Vec& S) const {
    if (dL_dS) return dL_dS(q, v, S);
    return fd::gradient([&](const Vec& ss) { return lagrangian(q, v, ss); }, S);
}

Mat NetworkModel::mass_matrix(const Vec& q, const Vec& v, const Vec& S) const {
    if (d2L_dv2) return d2L_dv2(q, v, S);
    if (dL_dv) return fd::jacobian([&](const Vec& vv) { return dL_dv(q, vv, S); }, v);
    return fd::hessian([&](const Vec& vv) { return lagrangian(q, vv, S); }, v);
}

Mat NetworkModel::cross_vq(const Vec& q, const Vec& v, const Vec& S) const {
    if (d2L_dvdq) return d2L_dvdq(q, v, S);
    return fd::jacobian([&](const Vec& qq) { return grad_v(qq, v, S); }, q);
}

Mat NetworkModel::cross_vS(const Vec& q, const Vec& v, const Vec& S) const {
    if (d2L_dvdS) return d2L_dvdS(q, v, S);
    return fd::jacobian([&](const Vec& ss) { return grad_v(q, v, ss); }, S);
}

Vec NetworkModel::friction(int A, const Vec& q, const Vec& v, const Vec& S) const {
    if (A < static_cast<int>(frictions.size()) && frictions[A]) return frictions[A](q, v, S);
    return Vec::Zero(dim);
}

Vec NetworkModel::external(int A, const Vec& q, const Vec& v, const Vec& S, double t) const {
    if (A < static_cast<int>(external_forces.size()) && external_forces[A])
        return external_forces[A](q, v, S, t);
    return Vec::Zero(dim);
}

Mat NetworkModel::conductivity(const Vec& q, const Vec& S) const {
    if (kappa_fn) return kappa_fn(q, S);
    if (kappa.size() == 0) return Mat::Zero(n_sub, n_sub);
    return kappa;
}

Vec NetworkModel::temperatures(const Vec& q, const Vec& v, const Vec& S) const {
    const Vec T = -grad_S(q, v, S);
    for (Eigen::Index A = 0; A < T.size(); ++A)
        if (!(T[A] > 0.0)) throw NonPositiveTemperature("subsystem temperature <= 0");
    return T;
}

Vec NetworkModel::source_temperatures(const NetworkState& state) const {
    Vec Tr(sources.size());
    for (std::size_t r = 0; r < sources.size(); ++r) {
        const double S_R = state.S_sources.size() > static_cast<Eigen::Index>(r)
                               ? state.S_sources[static_cast<Eigen::Index>(r)]
                               : 0.0;
        Tr[static_cast<Eigen::Index>(r)] = sources[r].temperature(S_R);
        if (!(Tr[static_cast<Eigen::Index>(r)] > 0.0))
            throw NonPositiveTemperature("source temperature <= 0");
    }
    return Tr;
}

void check_admissible(const NetworkModel& model, const NetworkState& state) {
    if (state.q.size() != model.dim || state.v.size() != model.dim)
        throw DimensionMismatch("network state dimension does not match model");
    if (state.S.size() != model.n_sub)
        throw DimensionMismatch("network entropy vector length != n_sub");
    if (!state.q.allFinite() || !state.v.allFinite() || !state.S.allFinite())
        throw DomainViolation("state has non-finite entries");
    if (!model.domain.contains(state.q))
        throw DomainViolation("configuration outside admissible box");
}

Mat friction_matrix(const Mat& kappa) {
    const Eigen::Index N = kappa.rows();
    if (kappa.cols() != N) throw DimensionMismatch("conductivity matrix must be square");
    if (!is_symmetric(kappa)) throw AsymmetricConductivity();
    for (Eigen::Index A = 0; A < N; ++A) {
        if (kappa(A, A) != 0.0)
            throw InvariantViolation("conductivity diagonal must be zero");
        for (Eigen::Index B = 0; B < N; ++B)
            if (kappa(A, B) < 0.0) throw NegativeConductivity();
    }
    Mat J = -kappa;
    for (Eigen::Index A = 0; A < N; ++A) J(A, A) = kappa.row(A).sum();
    return J;
}

HeatFlows heat_flows(const NetworkModel& model, const NetworkState& state) {
    check_admissible(model, state);
    const Vec T = model.temperatures(state.q, state.v, state.S);
    const Mat kap = model.conductivity(state.q, state.S);
    (void)friction_matrix(kap);  // validates symmetry/nonnegativity

    HeatFlows flows;
    flows.internal = Mat::Zero(model.n_sub, model.n_sub);
    for (int A = 0; A < model.n_sub; ++A)
        for (int B = A + 1; B < model.n_sub; ++B) {
            const double P = kap(A, B) * (T[B] - T[A]);  // P_H^{B->A}
            flows.internal(A, B) = P;
            flows.internal(B, A) = -P;
        }

    const Vec Tr = model.source_temperatures(state);
    flows.external = Mat::Zero(model.n_sub, static_cast<Eigen::Index>(model.sources.size()));
    for (std::size_t r = 0; r < model.sources.size(); ++r) {
        const Vec k = model.sources[r].couplings(state.q, state.S, model.n_sub);
        for (int A = 0; A < model.n_sub; ++A) {
            if (k[A] < 0.0) throw NegativeConductivity("source coupling is negative");
            flows.external(A, static_cast<Eigen::Index>(r)) =
                k[A] * (Tr[static_cast<Eigen::Index>(r)] - T[A]);
        }
    }
    return flows;
}

NetworkDeriv network_rhs(const NetworkModel& model, const NetworkState& state) {
    check_admissible(model, state);
    const Vec& q = state.q;
    const Vec& v = state.v;
    const Vec& S = state.S;
    const Vec T = model.temperatures(q, v, S);
    const HeatFlows flows = heat_flows(model, state);

    NetworkDeriv d;
    d.dq = v;
    d.dS = Vec::Zero(model.n_sub);
    Vec F_total = Vec::Zero(model.dim);
    for (int A = 0; A < model.n_sub; ++A) {
        const Vec F_fr = model.friction(A, q, v, S);
        const Vec F_ext = model.external(A, q, v, S, state.t);
        F_total += F_fr + F_ext;
        const double P_int = flows.internal.row(A).sum();
        const double P_ext = flows.external.row(A).sum();
        d.dS[A] = (-F_fr.dot(v) + P_int + P_ext) / T[A];
    }

    Vec rhs = model.grad_q(q, v, S) + F_total;
    rhs -= model.cross_vq(q, v, S) * v;
    rhs -= model.cross_vS(q, v, S) * d.dS;
    d.dv = solve_symmetric<SingularMassMatrix>(model.mass_matrix(q, v, S), rhs);

    d.dS_sources = Vec::Zero(static_cast<Eigen::Index>(model.sources.size()));
    const Vec Tr = model.source_temperatures(state);
    for (std::size_t r = 0; r < model.sources.size(); ++r) {
        if (model.sources[r].ideal()) continue;
        const double P_to_system = flows.external.col(static_cast<Eigen::Index>(r)).sum();
        d.dS_sources[static_cast<Eigen::Index>(r)] =
            -P_to_system / Tr[static_cast<Eigen::Index>(r)];
    }

    if (state.Gamma) d.dGamma = T;
    if (state.Sigma) d.dSigma = d.dS;
    return d;
}

EntropyRate entropy_rate(const NetworkModel& model, const NetworkState& state) {
    const NetworkDeriv d = network_rhs(model, state);
    const Vec T = model.temperatures(state.q, state.v, state.S);
    const Mat kap = model.conductivity(state.q, state.S);
    const HeatFlows flows = heat_flows(model, state);

    EntropyRate rate{};
    rate.total = d.dS.sum();
    rate.internal = 0.0;
    for (int A = 0; A < model.n_sub; ++A) {
        rate.internal -= model.friction(A, state.q, state.v, state.S).dot(state.v) / T[A];
        for (int B = A + 1; B < model.n_sub; ++B) {
            const double dT = T[B] - T[A];
            rate.internal += kap(A, B) * dT * dT / (T[A] * T[B]);
        }
    }
    rate.external = 0.0;
    for (int A = 0; A < model.n_sub; ++A)
        rate.external += flows.external.row(A).sum() / T[A];
    return rate;
}

EntropyBound exterior_entropy_bound(const NetworkModel& model, const NetworkState& state) {
    const EntropyRate rate = entropy_rate(model, state);
    const HeatFlows flows = heat_flows(model, state);
    const Vec Tr = model.source_temperatures(state);

    EntropyBound bound{};
    bound.lhs = rate.total;
    bound.mid = rate.external;
    bound.rhs = 0.0;
    for (std::size_t r = 0; r < model.sources.size(); ++r)
        bound.rhs += flows.external.col(static_cast<Eigen::Index>(r)).sum() /
                     Tr[static_cast<Eigen::Index>(r)];
    return bound;
}

double network_energy(const NetworkModel& model, const NetworkState& state) {
    check_admissible(model, state);
    const Vec p = model.grad_v(state.q, state.v, state.S);
    return p.dot(state.v) - model.lagrangian(state.q, state.v, state.S);
}

std::pair<double, double> network_external_powers(const NetworkModel& model,
                                                  const NetworkState& state) {
    double P_W = 0.0;
    for (int A = 0; A < model.n_sub; ++A)
        P_W += model.external(A, state.q, state.v, state.S, state.t).dot(state.v);
    const HeatFlows flows = heat_flows(model, state);
    const double P_H = flows.external.sum();
    return {P_W, P_H};
}

// ---------------------------------------------------------------------------
// Free-energy formulation
// ---------------------------------------------------------------------------

Vec FreeEnergyModel::grad_q(const Vec& q, const Vec& v, const Vec& T) const {
    if (dLf_dq) return dLf_dq(q, v, T);
    return fd::gradient([&](const Vec& qq) { return free_lagrangian(qq, v, T); }, q);
}

Vec FreeEnergyModel::grad_v(const Vec& q, const Vec& v, const Vec& T) const {
    if (dLf_dv) return dLf_dv(q, v, T);
    return fd::gradient([&](const Vec& vv) { return free_lagrangian(q, vv, T); }, v);
}

Vec FreeEnergyModel::entropies(const Vec& q, const Vec& v, const Vec& T) const {
    if (dLf_dT) return dLf_dT(q, v, T);
    return fd::gradient([&](const Vec& tt) { return free_lagrangian(q, v, tt); }, T);
}

Mat FreeEnergyModel::mass_matrix(const Vec& q, const Vec& v, const Vec& T) const {
    if (d2Lf_dv2) return d2Lf_dv2(q, v, T);
    if (dLf_dv) return fd::jacobian([&](const Vec& vv) { return dLf_dv(q, vv, T); }, v);
    return fd::hessian([&](const Vec& vv) { return free_lagrangian(q, vv, T); }, v);
}

Mat FreeEnergyModel::cross_vq(const Vec& q, const Vec& v, const Vec& T) const {
    if (d2Lf_dvdq) return d2Lf_dvdq(q, v, T);
    return fd::jacobian([&](const Vec& qq) { return grad_v(qq, v, T); }, q);
}

Mat FreeEnergyModel::capacity(const Vec& q, const Vec& v, const Vec& T) const {
    if (heat_capacity) return heat_capacity(q, v, T);
    return fd::jacobian([&](const Vec& tt) { return entropies(q, v, tt); }, T);
}

Mat FreeEnergyModel::entropies_dq(const Vec& q, const Vec& v, const Vec& T) const {
    if (dS_dq) return dS_dq(q, v, T);
    return fd::jacobian([&](const Vec& qq) { return entropies(qq, v, T); }, q);
}

Mat FreeEnergyModel::entropies_dv(const Vec& q, const Vec& v, const Vec& T) const {
    if (dS_dv) return dS_dv(q, v, T);
    return fd::jacobian([&](const Vec& vv) { return entropies(q, vv, T); }, v);
}

Vec FreeEnergyModel::friction(int A, const Vec& q, const Vec& v, const Vec& T) const {
    if (A < static_cast<int>(frictions.size()) && frictions[A]) return frictions[A](q, v, T);
    return Vec::Zero(dim);
}

Vec FreeEnergyModel::external(int A, const Vec& q, const Vec& v, const Vec& T, double t) const {
    if (A < static_cast<int>(external_forces.size()) && external_forces[A])
        return external_forces[A](q, v, T, t);
    return Vec::Zero(dim);
}

Mat FreeEnergyModel::conductivity(const Vec& q, const Vec& T) const {
    if (kappa_fn) return kappa_fn(q, T);
    if (kappa.size() == 0) return Mat::Zero(n_sub, n_sub);
    return kappa;
}

FreeEnergyDeriv free_energy_rhs(const FreeEnergyModel& model, const FreeEnergyState& state) {
    const Vec& q = state.q;
    const Vec& v = state.v;
    const Vec& T = state.T;
    if (q.size() != model.dim || v.size() != model.dim || T.size() != model.n_sub)
        throw DimensionMismatch("free-energy state dimension does not match model");
    for (Eigen::Index A = 0; A < T.size(); ++A)
        if (!(T[A] > 0.0)) throw NonPositiveTemperature("temperature state <= 0");
    if (!model.domain.contains(q)) throw DomainViolation("configuration outside admissible box");

    const Mat kap = model.conductivity(q, T);
    (void)friction_matrix(kap);

    Vec Tr(static_cast<Eigen::Index>(model.sources.size()));
    for (std::size_t r = 0; r < model.sources.size(); ++r) {
        const double S_R = state.S_sources.size() > static_cast<Eigen::Index>(r)
                               ? state.S_sources[static_cast<Eigen::Index>(r)]
                               : 0.0;
        Tr[static_cast<Eigen::Index>(r)] = model.sources[r].temperature(S_R);
    }

    FreeEnergyDeriv d;
    d.dq = v;

    Vec Sdot(model.n_sub);
    Vec F_total = Vec::Zero(model.dim);
    Vec P_ext_per_sub = Vec::Zero(model.n_sub);
    for (int A = 0; A < model.n_sub; ++A) {
        const Vec F_fr = model.friction(A, q, v, T);
        F_total += F_fr + model.external(A, q, v, T, state.t);
        double P = 0.0;
        for (int B = 0; B < model.n_sub; ++B) P += kap(A, B) * (T[B] - T[A]);
        for (std::size_t r = 0; r < model.sources.size(); ++r) {
            const Vec k = model.sources[r].couplings(q, T, model.n_sub);
            const double flow = k[A] * (Tr[static_cast<Eigen::Index>(r)] - T[A]);
            P += flow;
            P_ext_per_sub[A] += flow;
        }
        Sdot[A] = (-F_fr.dot(v) + P) / T[A];
    }

    Vec rhs = model.grad_q(q, v, T) + F_total;
    rhs -= model.cross_vq(q, v, T) * v;
    d.dv = solve_symmetric<SingularMassMatrix>(model.mass_matrix(q, v, T), rhs);

    const Mat C = model.capacity(q, v, T);
    Vec target = Sdot - model.entropies_dq(q, v, T) * v - model.entropies_dv(q, v, T) * d.dv;
    d.dT = solve_symmetric<SingularHeatCapacity>(C, target);

    d.dS_sources = Vec::Zero(static_cast<Eigen::Index>(model.sources.size()));
    for (std::size_t r = 0; r < model.sources.size(); ++r) {
        if (model.sources[r].ideal()) continue;
        const Vec k = model.sources[r].couplings(q, T, model.n_sub);
        double P_to_system = 0.0;
        for (int A = 0; A < model.n_sub; ++A)
            P_to_system += k[A] * (Tr[static_cast<Eigen::Index>(r)] - T[A]);
        d.dS_sources[static_cast<Eigen::Index>(r)] =
            -P_to_system / Tr[static_cast<Eigen::Index>(r)];
    }
    return d;
}

double free_energy_total_energy(const FreeEnergyModel& model, const FreeEnergyState& state) {
    // E = <dLf/dv, v> - Lf + sum_A T^A S_A (Legendre back-transform).
    const Vec p = model.grad_v(state.q, state.v, state.T);
    const Vec S = model.entropies(state.q, state.v, state.T);
    return p.dot(state.v) - model.free_lagrangian(state.q, state.v, state.T) +
           state.T.dot(S);
}

}  // namespace varitherm
