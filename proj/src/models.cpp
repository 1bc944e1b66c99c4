#include "varitherm/models.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "varitherm/csv.hpp"

namespace varitherm {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Built-in state functions
// ---------------------------------------------------------------------------

double PerfectGas::energy(double S, double N, double V) const {
    if (!(N > 0.0)) throw NegativeMoles();
    if (!(V > 0.0)) throw NegativeVolume();
    return U0 * std::exp((S / N - S0 / N0) / (c * R)) * std::pow(N / N0, 1.0 + 1.0 / c) *
           std::pow(V0 / V, 1.0 / c);
}

double PerfectGas::dU_dS(double S, double N, double V) const {
    return energy(S, N, V) / (c * R * N);
}

double PerfectGas::dU_dV(double S, double N, double V) const {
    return -energy(S, N, V) / (c * V);
}

double PerfectGas::dU_dN(double S, double N, double V) const {
    return energy(S, N, V) * ((1.0 + 1.0 / c) / N - S / (c * R * N * N));
}

double PerfectGas::temperature(double S, double N, double V) const { return dU_dS(S, N, V); }

double PerfectGas::pressure(double S, double N, double V) const {
    return energy(S, N, V) / (c * V);
}

double PerfectGas::entropy_for(double T, double N, double V) const {
    if (!(T > 0.0)) throw NonPositiveTemperature();
    const double target = c * N * R * T;
    const double shape = std::pow(N / N0, 1.0 + 1.0 / c) * std::pow(V0 / V, 1.0 / c);
    return N * (S0 / N0 + c * R * std::log(target / (U0 * shape)));
}

PerfectGas PerfectGas::at_reference(double T_ref, double N0, double V0, double c, double R,
                                    double S0) {
    PerfectGas g;
    g.c = c;
    g.R = R;
    g.N0 = N0;
    g.V0 = V0;
    g.S0 = S0;
    g.U0 = c * N0 * R * T_ref;
    return g;
}

double IdealMixture::phi(const Vec& N, double V) const {
    if (!(V > 0.0)) throw NegativeVolume();
    double acc = 0.0;
    for (int I = 0; I < species(); ++I) {
        if (!(N[I] > 0.0)) throw NegativeMoles();
        acc += N[I] * (s0[I] - R * std::log(N[I] / (n_ref * V)));
    }
    return acc;
}

double IdealMixture::temperature(double S, const Vec& N, double V) const {
    const double C = heat_capacity(N);
    return T0 * std::exp((S - phi(N, V)) / (C * R));
}

double IdealMixture::energy(double S, const Vec& N, double V) const {
    return heat_capacity(N) * R * temperature(S, N, V);
}

Vec IdealMixture::chemical_potentials(double S, const Vec& N, double V) const {
    const double T = temperature(S, N, V);
    const double logT = std::log(T / T0);
    Vec mu(species());
    for (int I = 0; I < species(); ++I)
        mu[I] = T * (c[I] * R - s0[I] + R * std::log(N[I] / (n_ref * V)) + R -
                     c[I] * R * logT);
    return mu;
}

double IdealMixture::pressure(double S, const Vec& N, double V) const {
    return N.sum() * R * temperature(S, N, V) / V;
}

double IdealMixture::entropy_for(double T, const Vec& N, double V) const {
    if (!(T > 0.0)) throw NonPositiveTemperature();
    return phi(N, V) + heat_capacity(N) * R * std::log(T / T0);
}

double IdealMixture::phi_multi(const Mat& N, const Vec& vols) const {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < N.rows(); ++k)
        acc += phi(N.row(k).transpose(), vols[k]);
    return acc;
}

double IdealMixture::temperature_multi(double S, const Mat& N, const Vec& vols) const {
    double C = 0.0;
    for (Eigen::Index k = 0; k < N.rows(); ++k) C += heat_capacity(N.row(k).transpose());
    return T0 * std::exp((S - phi_multi(N, vols)) / (C * R));
}

double IdealMixture::energy_multi(double S, const Mat& N, const Vec& vols) const {
    double C = 0.0;
    for (Eigen::Index k = 0; k < N.rows(); ++k) C += heat_capacity(N.row(k).transpose());
    return C * R * temperature_multi(S, N, vols);
}

Mat IdealMixture::chemical_potentials_multi(double S, const Mat& N, const Vec& vols) const {
    const double T = temperature_multi(S, N, vols);
    const double logT = std::log(T / T0);
    Mat mu(N.rows(), species());
    for (Eigen::Index k = 0; k < N.rows(); ++k)
        for (int I = 0; I < species(); ++I)
            mu(k, I) = T * (c[I] * R - s0[I] + R * std::log(N(k, I) / (n_ref * vols[k])) + R -
                            c[I] * R * logT);
    return mu;
}

double IdealMixture::entropy_for_multi(double T, const Mat& N, const Vec& vols) const {
    if (!(T > 0.0)) throw NonPositiveTemperature();
    double C = 0.0;
    for (Eigen::Index k = 0; k < N.rows(); ++k) C += heat_capacity(N.row(k).transpose());
    return phi_multi(N, vols) + C * R * std::log(T / T0);
}

EOS make_mixture_eos(const IdealMixture& mix, const Vec& molar_mass) {
    EOS eos;
    eos.n_species = mix.species();
    eos.molar_mass = molar_mass;
    eos.energy = [mix](const Vec& n, double s) { return mix.energy(s, n, 1.0); };
    eos.dE_ds = [mix](const Vec& n, double s) { return mix.temperature(s, n, 1.0); };
    eos.dE_dn = [mix](const Vec& n, double s) { return mix.chemical_potentials(s, n, 1.0); };
    return eos;
}

// ---------------------------------------------------------------------------
// Parameter plumbing
// ---------------------------------------------------------------------------

namespace {

double num(const json& p, const std::string& key) {
    if (!p.contains(key)) throw ParseError("missing parameter: " + key);
    return p.at(key).get<double>();
}

int integer(const json& p, const std::string& key) {
    return static_cast<int>(std::llround(num(p, key)));
}

std::string str(const json& p, const std::string& key) {
    return p.at(key).get<std::string>();
}

Vec vec_of(const json& j) {
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

Mat mat_of(const json& j) {
    const std::size_t rows = j.size();
    if (rows == 0) return Mat();
    const std::size_t cols = j[0].size();
    Mat m(rows, cols);
    for (std::size_t a = 0; a < rows; ++a) {
        if (j[a].size() != cols) throw ParseError("ragged matrix parameter");
        for (std::size_t b = 0; b < cols; ++b) m(a, b) = j[a][b].get<double>();
    }
    return m;
}

double init_num(const json& initial, const std::string& key, double fallback) {
    if (initial.contains(key)) return initial.at(key).get<double>();
    return fallback;
}

IntegratorConfig default_ode_config(double t_end = 10.0, double dt = 1e-3) {
    IntegratorConfig cfg;
    cfg.method = IntegratorConfig::Method::rk4;
    cfg.dt = dt;
    cfg.t_end = t_end;
    cfg.record_every = 10;
    return cfg;
}

std::vector<double> pack_row(double t, std::initializer_list<double> values) {
    std::vector<double> row{t};
    row.insert(row.end(), values);
    return row;
}

// Assemble the standard ODE runtime for a SimpleModel over y = [q, v, S].
ModelRuntime simple_runtime(
    std::shared_ptr<const SimpleModel> model, const SimpleState& init,
    std::vector<std::string> q_names,
    std::function<void(DiagRecord&, const SimpleModel&, const SimpleState&)> extra_diag = {}) {
    const int n = model->dim;
    auto unpack = [n](const Vec& y) {
        SimpleState s;
        s.q = y.head(n);
        s.v = y.segment(n, n);
        s.S = y[2 * n];
        return s;
    };

    ModelRuntime rt;
    rt.config = default_ode_config();
    rt.y0.resize(2 * n + 1);
    rt.y0 << init.q, init.v, init.S;

    rt.rhs = [model, unpack, n](double t, const Vec& y) {
        SimpleState s = unpack(y);
        s.t = t;
        const SimpleDeriv d = simple_rhs(*model, s);
        Vec dy(2 * n + 1);
        dy << d.dq, d.dv, d.dS;
        return dy;
    };

    rt.hooks.diagnostics = [model, unpack, extra_diag](double t, const Vec& y) {
        SimpleState s = unpack(y);
        s.t = t;
        DiagRecord rec;
        rec.E = energy(*model, s);
        rec.P_W = model->external(s.q, s.v, s.S, t).dot(s.v);
        rec.P_H = model->heat(s.q, s.v, s.S, t);
        rec.I = internal_production(*model, s);
        rec.S_total = s.S;
        rec.set("T_1", temperature(*model, s));
        if (extra_diag) extra_diag(rec, *model, s);
        return rec;
    };

    rt.csv_header = {"t"};
    for (const auto& qn : q_names) rt.csv_header.push_back(qn);
    for (const auto& qn : q_names) rt.csv_header.push_back("d" + qn);
    rt.csv_header.insert(rt.csv_header.end(),
                         {"S_1", "T_1", "E", "P_W_ext", "P_H_ext", "I_internal", "S_total"});
    rt.csv_row = [model, unpack, n](double t, const Vec& y) {
        SimpleState s = unpack(y);
        s.t = t;
        std::vector<double> row{t};
        for (int i = 0; i < n; ++i) row.push_back(s.q[i]);
        for (int i = 0; i < n; ++i) row.push_back(s.v[i]);
        row.push_back(s.S);
        row.push_back(temperature(*model, s));
        row.push_back(energy(*model, s));
        row.push_back(model->external(s.q, s.v, s.S, t).dot(s.v));
        row.push_back(model->heat(s.q, s.v, s.S, t));
        row.push_back(internal_production(*model, s));
        row.push_back(s.S);
        return row;
    };

    rt.entropies = [n](const Vec& y) { return Vec::Constant(1, y[2 * n]); };
    return rt;
}

// Assemble the ODE runtime for a NetworkModel over
// y = [q, v, S, S_sources, Gamma?]; the thermal displacements are optional
// diagnostic accumulators with dGamma^A = T^A.
ModelRuntime network_runtime(
    std::shared_ptr<const NetworkModel> model, const NetworkState& init,
    std::vector<std::string> q_names,
    std::function<void(DiagRecord&, const NetworkModel&, const NetworkState&)> extra_diag = {},
    bool track_gamma = false) {
    const int n = model->dim;
    const int N = model->n_sub;
    const int nsrc = static_cast<int>(model->sources.size());
    const int ngam = track_gamma ? N : 0;
    auto unpack = [n, N, nsrc, ngam](const Vec& y) {
        NetworkState s;
        s.q = y.head(n);
        s.v = y.segment(n, n);
        s.S = y.segment(2 * n, N);
        s.S_sources = nsrc > 0 ? Vec(y.segment(2 * n + N, nsrc)) : Vec();
        if (ngam > 0) s.Gamma = Vec(y.segment(2 * n + N + nsrc, ngam));
        return s;
    };

    ModelRuntime rt;
    rt.config = default_ode_config();
    rt.y0.resize(2 * n + N + nsrc + ngam);
    rt.y0.head(n) = init.q;
    rt.y0.segment(n, n) = init.v;
    rt.y0.segment(2 * n, N) = init.S;
    if (nsrc > 0) rt.y0.segment(2 * n + N, nsrc) = init.S_sources;
    if (ngam > 0)
        rt.y0.segment(2 * n + N + nsrc, ngam) =
            init.Gamma ? *init.Gamma : Vec::Zero(ngam);

    rt.rhs = [model, unpack, n, N, nsrc, ngam](double t, const Vec& y) {
        NetworkState s = unpack(y);
        s.t = t;
        const NetworkDeriv d = network_rhs(*model, s);
        Vec dy(2 * n + N + nsrc + ngam);
        dy.head(n) = d.dq;
        dy.segment(n, n) = d.dv;
        dy.segment(2 * n, N) = d.dS;
        if (nsrc > 0) dy.segment(2 * n + N, nsrc) = d.dS_sources;
        if (ngam > 0) dy.segment(2 * n + N + nsrc, ngam) = *d.dGamma;
        return dy;
    };

    rt.hooks.diagnostics = [model, unpack, extra_diag](double t, const Vec& y) {
        NetworkState s = unpack(y);
        s.t = t;
        DiagRecord rec;
        rec.E = network_energy(*model, s);
        const auto [pw, ph] = network_external_powers(*model, s);
        rec.P_W = pw;
        rec.P_H = ph;
        rec.I = entropy_rate(*model, s).internal;
        rec.S_total = s.S.sum();
        const Vec T = model->temperatures(s.q, s.v, s.S);
        for (int A = 0; A < model->n_sub; ++A)
            rec.set("T_" + std::to_string(A + 1), T[A]);
        if (extra_diag) extra_diag(rec, *model, s);
        return rec;
    };

    rt.csv_header = {"t"};
    for (const auto& qn : q_names) rt.csv_header.push_back(qn);
    for (const auto& qn : q_names) rt.csv_header.push_back("d" + qn);
    for (int A = 0; A < N; ++A) rt.csv_header.push_back("S_" + std::to_string(A + 1));
    for (int A = 0; A < N; ++A) rt.csv_header.push_back("T_" + std::to_string(A + 1));
    rt.csv_header.insert(rt.csv_header.end(), {"E", "P_W_ext", "P_H_ext", "I_internal", "S_total"});
    for (int A = 0; A < ngam; ++A) rt.csv_header.push_back("Gamma_" + std::to_string(A + 1));
    rt.csv_row = [model, unpack, n, N, ngam](double t, const Vec& y) {
        NetworkState s = unpack(y);
        s.t = t;
        std::vector<double> row{t};
        for (int i = 0; i < n; ++i) row.push_back(s.q[i]);
        for (int i = 0; i < n; ++i) row.push_back(s.v[i]);
        for (int A = 0; A < N; ++A) row.push_back(s.S[A]);
        const Vec T = model->temperatures(s.q, s.v, s.S);
        for (int A = 0; A < N; ++A) row.push_back(T[A]);
        row.push_back(network_energy(*model, s));
        const auto [pw, ph] = network_external_powers(*model, s);
        row.push_back(pw);
        row.push_back(ph);
        row.push_back(entropy_rate(*model, s).internal);
        row.push_back(s.S.sum());
        for (int A = 0; A < ngam; ++A) row.push_back((*s.Gamma)[A]);
        return row;
    };

    rt.entropies = [n, N](const Vec& y) { return Vec(y.segment(2 * n, N)); };
    return rt;
}

SamplingBox box1(double qlo, double qhi, double vlo, double vhi, double Slo, double Shi) {
    SamplingBox b;
    b.q_lo = Vec::Constant(1, qlo);
    b.q_hi = Vec::Constant(1, qhi);
    b.v_lo = Vec::Constant(1, vlo);
    b.v_hi = Vec::Constant(1, vhi);
    b.S_lo = Vec::Constant(1, Slo);
    b.S_hi = Vec::Constant(1, Shi);
    return b;
}

// Randomized check of ideal-mixture partials against finite differences.
double mixture_gradient_check(const IdealMixture& mix, int n_states, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double worst = 0.0;
    const int K = mix.species();
    for (int k = 0; k < n_states; ++k) {
        Vec N(K);
        for (int I = 0; I < K; ++I) N[I] = 0.3 + 1.7 * uni(rng);
        const double S = -0.5 + 1.5 * uni(rng);
        const double V = 0.5 + 1.5 * uni(rng);
        const Vec mu = mix.chemical_potentials(S, N, V);
        const Vec mu_fd =
            fd::gradient([&](const Vec& n) { return mix.energy(S, n, V); }, N);
        const double T = mix.temperature(S, N, V);
        const double T_fd = fd::partial([&](double s) { return mix.energy(s, N, V); }, S);
        const double p = mix.pressure(S, N, V);
        const double p_fd = -fd::partial([&](double v) { return mix.energy(S, N, v); }, V);
        for (int I = 0; I < K; ++I)
            worst = std::max(worst, std::abs(mu[I] - mu_fd[I]) /
                                        std::max(1.0, std::abs(mu[I])));
        worst = std::max(worst, std::abs(T - T_fd) / std::max(1.0, std::abs(T)));
        worst = std::max(worst, std::abs(p - p_fd) / std::max(1.0, std::abs(p)));
    }
    return worst;
}

double perfect_gas_gradient_check(const PerfectGas& gas, int n_states, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < n_states; ++k) {
        const double S = -0.5 + 1.5 * uni(rng);
        const double N = 0.5 + 1.5 * uni(rng);
        const double V = 0.5 + 1.5 * uni(rng);
        auto U = [&](double s, double n, double v) { return gas.energy(s, n, v); };
        const double dS = fd::partial([&](double s) { return U(s, N, V); }, S);
        const double dN = fd::partial([&](double n) { return U(S, n, V); }, N);
        const double dV = fd::partial([&](double v) { return U(S, N, v); }, V);
        worst = std::max(worst,
                         std::abs(gas.dU_dS(S, N, V) - dS) / std::max(1.0, std::abs(dS)));
        worst = std::max(worst,
                         std::abs(gas.dU_dN(S, N, V) - dN) / std::max(1.0, std::abs(dN)));
        worst = std::max(worst,
                         std::abs(gas.dU_dV(S, N, V) - dV) / std::max(1.0, std::abs(dV)));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Catalog builders
// ---------------------------------------------------------------------------

ModelRuntime build_one_cylinder(const json& p, const json& initial) {
    const double m = num(p, "mass");
    const double area = num(p, "area");
    const double lambda = num(p, "lambda");
    const double F_ext = num(p, "F_ext");
    const double P_H = num(p, "P_H");
    const PerfectGas gas = PerfectGas::at_reference(num(p, "T_ref"), num(p, "moles"),
                                                    area * num(p, "x_ref"), num(p, "c"),
                                                    num(p, "gas_constant"));
    const double N = num(p, "moles");

    auto model = std::make_shared<SimpleModel>();
    model->name = "one_cylinder";
    model->dim = 1;
    model->lagrangian = [=](const Vec& q, const Vec& v, double S) {
        return 0.5 * m * v[0] * v[0] - gas.energy(S, N, area * q[0]);
    };
    model->dL_dq = [=](const Vec& q, const Vec&, double S) {
        return Vec::Constant(1, -gas.dU_dV(S, N, area * q[0]) * area);
    };
    model->dL_dv = [=](const Vec&, const Vec& v, double) { return Vec::Constant(1, m * v[0]); };
    model->dL_dS = [=](const Vec& q, const Vec&, double S) {
        return -gas.dU_dS(S, N, area * q[0]);
    };
    model->d2L_dv2 = [=](const Vec&, const Vec&, double) { return Mat::Constant(1, 1, m); };
    model->d2L_dvdq = [](const Vec&, const Vec&, double) { return Mat::Zero(1, 1); };
    model->d2L_dvdS = [](const Vec&, const Vec&, double) { return Vec::Zero(1); };
    if (lambda != 0.0)
        model->friction_force = [lambda](const Vec&, const Vec& v, double) {
            return Vec::Constant(1, -lambda * v[0]);
        };
    if (F_ext != 0.0)
        model->external_force = [F_ext](const Vec&, const Vec&, double, double) {
            return Vec::Constant(1, F_ext);
        };
    if (P_H != 0.0)
        model->heat_power = [P_H](const Vec&, const Vec&, double, double) { return P_H; };
    model->domain = Box::unbounded(1);
    model->domain.lo[0] = 1e-9;

    SimpleState init;
    init.q = Vec::Constant(1, init_num(initial, "x", 0.8));
    init.v = Vec::Constant(1, init_num(initial, "v", 0.0));
    init.S = init_num(initial, "S", 0.0);

    ModelRuntime rt = simple_runtime(model, init, {"x"},
                                     [gas, N, area](DiagRecord& rec, const SimpleModel&,
                                                    const SimpleState& s) {
                                         rec.set("p", gas.pressure(s.S, N, area * s.q[0]));
                                     });
    rt.gradient_check_fn = [model, gas](int n_states, std::uint64_t seed) {
        const double a = gradient_check(*model, box1(0.5, 2.0, -1.0, 1.0, -0.5, 0.8),
                                        n_states, seed);
        return std::max(a, perfect_gas_gradient_check(gas, n_states, seed + 1));
    };
    return rt;
}

ModelRuntime build_mass_spring(const json& p, const json& initial) {
    const double m = num(p, "mass");
    const double k0 = num(p, "k0");
    const double alpha = num(p, "alpha");
    const double u0 = num(p, "u0");
    const double cs = num(p, "cs");
    const double lambda = num(p, "lambda");
    const double eps = num(p, "eps_reg");
    const double F_ext = num(p, "F_ext");
    const double P_H = num(p, "P_H");

    auto model = std::make_shared<SimpleModel>();
    model->name = "mass_spring";
    model->dim = 1;
    model->lagrangian = [=](const Vec& q, const Vec& v, double S) {
        return 0.5 * m * v[0] * v[0] - 0.5 * k0 * (1.0 + alpha * S) * q[0] * q[0] -
               u0 * std::exp(S / cs);
    };
    model->dL_dq = [=](const Vec& q, const Vec&, double S) {
        return Vec::Constant(1, -k0 * (1.0 + alpha * S) * q[0]);
    };
    model->dL_dv = [=](const Vec&, const Vec& v, double) { return Vec::Constant(1, m * v[0]); };
    model->dL_dS = [=](const Vec& q, const Vec&, double S) {
        return -0.5 * k0 * alpha * q[0] * q[0] - (u0 / cs) * std::exp(S / cs);
    };
    model->d2L_dv2 = [=](const Vec&, const Vec&, double) { return Mat::Constant(1, 1, m); };
    model->d2L_dvdq = [](const Vec&, const Vec&, double) { return Mat::Zero(1, 1); };
    model->d2L_dvdS = [](const Vec&, const Vec&, double) { return Vec::Zero(1); };
    if (lambda != 0.0)
        model->friction_force = [lambda, eps](const Vec&, const Vec& v, double) {
            // Regularized Coulomb law -lambda v/sqrt(v^2 + eps^2).
            return Vec::Constant(1, -lambda * v[0] / std::sqrt(v[0] * v[0] + eps * eps));
        };
    if (F_ext != 0.0)
        model->external_force = [F_ext](const Vec&, const Vec&, double, double) {
            return Vec::Constant(1, F_ext);
        };
    if (P_H != 0.0)
        model->heat_power = [P_H](const Vec&, const Vec&, double, double) { return P_H; };
    const double x_max = num(p, "x_max");
    if (x_max > 0.0) {
        model->domain = Box::unbounded(1);
        model->domain.hi[0] = x_max;
    }

    SimpleState init;
    init.q = Vec::Constant(1, init_num(initial, "x", 1.0));
    init.v = Vec::Constant(1, init_num(initial, "v", 0.0));
    init.S = init_num(initial, "S", 0.0);

    ModelRuntime rt = simple_runtime(model, init, {"x"});
    rt.gradient_check_fn = [model](int n_states, std::uint64_t seed) {
        return gradient_check(*model, box1(-1.5, 1.5, -1.0, 1.0, -0.5, 0.8), n_states, seed);
    };
    return rt;
}

ModelRuntime build_rlc_series(const json& p, const json& initial) {
    const double L0 = num(p, "L0");
    const double C0 = num(p, "C0");
    const double Rres = num(p, "R");
    const double beta = num(p, "beta");
    const double u0 = num(p, "u0");
    const double cs = num(p, "cs");
    const double V_amp = num(p, "V_ext");
    const double V_freq = num(p, "V_freq");
    const double P_H = num(p, "P_H");

    auto model = std::make_shared<SimpleModel>();
    model->name = "rlc_series";
    model->dim = 1;
    model->lagrangian = [=](const Vec& q, const Vec& v, double S) {
        const double i = v[0];
        return 0.5 * L0 * i * i + 0.25 * beta * i * i * i * i - 0.5 * q[0] * q[0] / C0 -
               u0 * std::exp(S / cs);
    };
    model->dL_dq = [=](const Vec& q, const Vec&, double) {
        return Vec::Constant(1, -q[0] / C0);
    };
    model->dL_dv = [=](const Vec&, const Vec& v, double) {
        // Flux linkage of the (possibly nonlinear) inductor.
        return Vec::Constant(1, L0 * v[0] + beta * v[0] * v[0] * v[0]);
    };
    model->dL_dS = [=](const Vec&, const Vec&, double S) {
        return -(u0 / cs) * std::exp(S / cs);
    };
    model->d2L_dv2 = [=](const Vec&, const Vec& v, double) {
        return Mat::Constant(1, 1, L0 + 3.0 * beta * v[0] * v[0]);
    };
    model->d2L_dvdq = [](const Vec&, const Vec&, double) { return Mat::Zero(1, 1); };
    model->d2L_dvdS = [](const Vec&, const Vec&, double) { return Vec::Zero(1); };
    if (Rres != 0.0)
        model->friction_force = [Rres](const Vec&, const Vec& v, double) {
            return Vec::Constant(1, -Rres * v[0]);
        };
    if (V_amp != 0.0)
        model->external_force = [V_amp, V_freq](const Vec&, const Vec&, double, double t) {
            return Vec::Constant(1, V_amp * std::sin(V_freq * t));
        };
    if (P_H != 0.0)
        model->heat_power = [P_H](const Vec&, const Vec&, double, double) { return P_H; };

    SimpleState init;
    init.q = Vec::Constant(1, init_num(initial, "q", 1.0));
    init.v = Vec::Constant(1, init_num(initial, "i", 0.0));
    init.S = init_num(initial, "S", 0.0);

    ModelRuntime rt = simple_runtime(model, init, {"q"});
    rt.gradient_check_fn = [model](int n_states, std::uint64_t seed) {
        return gradient_check(*model, box1(-1.5, 1.5, -1.0, 1.0, -0.5, 0.8), n_states, seed);
    };
    return rt;
}

ReactionNetwork make_network(const json& p, const IdealMixture& mix) {
    ReactionNetwork net;
    net.nu_fwd = mat_of(p.at("nu_fwd"));
    net.nu_bwd = mat_of(p.at("nu_bwd"));
    net.n_reactions = static_cast<int>(net.nu_fwd.rows());
    net.n_species = static_cast<int>(net.nu_fwd.cols());
    net.nu = net.nu_bwd - net.nu_fwd;
    net.molar_mass = vec_of(p.at("molar_mass"));
    const Mat L = mat_of(p.at("rate_matrix"));
    net.rate_matrix = [L](const Vec&, double) { return L; };
    net.internal_energy = [mix](double S, const Vec& N, double V) {
        return mix.energy(S, N, V);
    };
    net.dU_dN = [mix](double S, const Vec& N, double V) {
        return mix.chemical_potentials(S, N, V);
    };
    net.dU_dS = [mix](double S, const Vec& N, double V) { return mix.temperature(S, N, V); };
    net.dU_dV = [mix](double S, const Vec& N, double V) { return -mix.pressure(S, N, V); };
    net.validate();
    return net;
}

IdealMixture make_mixture(const json& p) {
    IdealMixture mix;
    mix.c = vec_of(p.at("mix_c"));
    mix.s0 = vec_of(p.at("mix_s0"));
    mix.R = num(p, "gas_constant");
    mix.T0 = 1.0;
    mix.n_ref = 1.0;
    return mix;
}

ModelRuntime build_reactor(const json& p, const json& initial) {
    const IdealMixture mix = make_mixture(p);
    const auto net = std::make_shared<ReactionNetwork>(make_network(p, mix));
    const double V0 = num(p, "V0");
    const double P_H = num(p, "P_H");
    const Vec N_ref = vec_of(p.at("N_ref"));
    const bool psi_form = str(p, "formulation") == "psi";
    const int R = net->n_species;
    const int r = net->n_reactions;

    Vec N0 = N_ref;
    if (initial.contains("N")) N0 = vec_of(initial.at("N"));
    double S_init;
    if (initial.contains("S"))
        S_init = initial.at("S").get<double>();
    else
        S_init = mix.entropy_for(init_num(initial, "T", 1.0), N0, V0);

    ModelRuntime rt;
    rt.config = default_ode_config();
    rt.audit_mass = true;
    rt.thresholds.mass_abs = 1e-10;

    const int nstate = (psi_form ? r : R) + 1;
    rt.y0.resize(nstate);
    if (psi_form) {
        rt.y0.head(r) = initial.contains("psi") ? vec_of(initial.at("psi")) : Vec::Zero(r);
        rt.y0[r] = S_init;
    } else {
        rt.y0.head(R) = N0;
        rt.y0[R] = S_init;
    }

    ReactorParams params;
    params.N_ref = N_ref;
    params.V0 = V0;
    params.P_H = P_H;

    auto moles_of = [net, params, psi_form, R, r](const Vec& y) {
        return psi_form ? moles_from_psi(*net, y.head(r), params.N_ref) : Vec(y.head(R));
    };

    if (psi_form) {
        rt.rhs = [net, params, r](double, const Vec& y) {
            const PsiDeriv d = reactor_rhs_psi(*net, y.head(r), y[r], params);
            Vec dy(r + 1);
            dy << d.dpsi, d.dS;
            return dy;
        };
    } else {
        rt.rhs = [net, params, R](double, const Vec& y) {
            const NDeriv d = reactor_rhs_N(*net, y.head(R), y[R], params.P_H, params.V0);
            Vec dy(R + 1);
            dy << d.dN, d.dS;
            return dy;
        };
    }

    rt.hooks.diagnostics = [net, params, moles_of, nstate](double, const Vec& y) {
        const Vec N = moles_of(y);
        const double S = y[nstate - 1];
        const double T = net->temperature(S, N, params.V0);
        const Vec mu = net->chemical_potentials(S, N, params.V0);
        const Vec A = affinity(*net, mu);
        const Vec J = net->flux(N, S, A);
        DiagRecord rec;
        rec.E = net->internal_energy(S, N, params.V0);
        rec.P_W = 0.0;
        rec.P_H = params.P_H;
        rec.I = J.dot(A) / T;
        rec.S_total = S;
        rec.set("T_1", T);
        rec.set("mass", net->molar_mass.dot(N));
        rec.set("gap_affinity", A.cwiseAbs().maxCoeff());
        for (int I = 0; I < net->n_species; ++I)
            rec.set("N_" + std::to_string(I + 1), N[I]);
        return rec;
    };

    rt.csv_header = {"t"};
    if (psi_form)
        for (int a = 0; a < r; ++a) rt.csv_header.push_back("psi_" + std::to_string(a + 1));
    else
        for (int I = 0; I < R; ++I) rt.csv_header.push_back("N_" + std::to_string(I + 1));
    rt.csv_header.insert(rt.csv_header.end(),
                         {"S_1", "T_1", "E", "P_W_ext", "P_H_ext", "I_internal", "S_total"});
    rt.csv_row = [net, params, moles_of, psi_form, R, r, nstate](double t, const Vec& y) {
        std::vector<double> row{t};
        for (int i = 0; i < nstate - 1; ++i) row.push_back(y[i]);
        const Vec N = moles_of(y);
        const double S = y[nstate - 1];
        const double T = net->temperature(S, N, params.V0);
        const Vec mu = net->chemical_potentials(S, N, params.V0);
        const Vec A = affinity(*net, mu);
        const Vec J = net->flux(N, S, A);
        row.push_back(S);
        row.push_back(T);
        row.push_back(net->internal_energy(S, N, params.V0));
        row.push_back(0.0);
        row.push_back(params.P_H);
        row.push_back(J.dot(A) / T);
        row.push_back(S);
        return row;
    };

    rt.entropies = [nstate](const Vec& y) { return Vec::Constant(1, y[nstate - 1]); };
    rt.equilibrium_thresholds = {{"gap_affinity", 1e-6}};
    rt.gradient_check_fn = [mix](int n_states, std::uint64_t seed) {
        return mixture_gradient_check(mix, n_states, seed);
    };
    return rt;
}

ModelRuntime build_chem_piston(const json& p, const json& initial) {
    const IdealMixture mix = make_mixture(p);
    const auto net = std::make_shared<ReactionNetwork>(make_network(p, mix));
    const int r = net->n_reactions;

    PistonParams piston;
    piston.mass = num(p, "mass");
    piston.area = num(p, "area");
    piston.lambda = num(p, "lambda");
    piston.N_ref = vec_of(p.at("N_ref"));
    piston.P_H = num(p, "P_H");
    piston.x_min = 1e-9;
    const double F_ext = num(p, "F_ext");
    if (F_ext != 0.0) piston.F_ext = [F_ext](double) { return F_ext; };

    const double x0 = init_num(initial, "x", 1.6);
    const double v0 = init_num(initial, "v", 0.0);
    Vec psi0 = initial.contains("psi") ? vec_of(initial.at("psi")) : Vec::Zero(r);
    double S_init;
    if (initial.contains("S"))
        S_init = initial.at("S").get<double>();
    else
        S_init = mix.entropy_for(init_num(initial, "T", 1.0),
                                 moles_from_psi(*net, psi0, piston.N_ref), piston.area * x0);

    ModelRuntime rt;
    rt.config = default_ode_config();
    rt.audit_mass = true;
    rt.thresholds.mass_abs = 1e-10;
    rt.y0.resize(2 + r + 1);
    rt.y0[0] = x0;
    rt.y0[1] = v0;
    rt.y0.segment(2, r) = psi0;
    rt.y0[2 + r] = S_init;

    rt.rhs = [net, piston, r](double t, const Vec& y) {
        const ChemoMechDeriv d =
            chemo_mechanical_rhs(*net, piston, y[0], y[1], y.segment(2, r), y[2 + r], t);
        Vec dy(3 + r);
        dy[0] = d.dx;
        dy[1] = d.dv;
        dy.segment(2, r) = d.dpsi;
        dy[2 + r] = d.dS;
        return dy;
    };

    rt.hooks.diagnostics = [net, piston, r](double t, const Vec& y) {
        const double x = y[0], v = y[1], S = y[2 + r];
        const double V = piston.area * x;
        const Vec N = moles_from_psi(*net, y.segment(2, r), piston.N_ref);
        const double T = net->temperature(S, N, V);
        const Vec mu = net->chemical_potentials(S, N, V);
        const Vec A = affinity(*net, mu);
        const ChemoMechDeriv d =
            chemo_mechanical_rhs(*net, piston, x, v, y.segment(2, r), S, t);
        DiagRecord rec;
        rec.E = 0.5 * piston.mass * v * v + net->internal_energy(S, N, V);
        rec.P_W = (piston.F_ext ? piston.F_ext(t) : 0.0) * v;
        rec.P_H = piston.P_H;
        rec.I = d.prod_friction + d.prod_chemical;
        rec.S_total = S;
        rec.set("T_1", T);
        rec.set("p", net->pressure(S, N, V));
        rec.set("mass", net->molar_mass.dot(N));
        rec.set("gap_affinity", A.cwiseAbs().maxCoeff());
        rec.set("gap_v", std::abs(v));
        return rec;
    };

    rt.csv_header = {"t", "x"};
    for (int a = 0; a < r; ++a) rt.csv_header.push_back("psi_" + std::to_string(a + 1));
    rt.csv_header.insert(rt.csv_header.end(),
                         {"dx", "S_1", "T_1", "E", "P_W_ext", "P_H_ext", "I_internal", "S_total"});
    rt.csv_row = [net, piston, r](double t, const Vec& y) {
        const double x = y[0], v = y[1], S = y[2 + r];
        const double V = piston.area * x;
        const Vec N = moles_from_psi(*net, y.segment(2, r), piston.N_ref);
        const double T = net->temperature(S, N, V);
        const ChemoMechDeriv d =
            chemo_mechanical_rhs(*net, piston, x, v, y.segment(2, r), S, t);
        std::vector<double> row{t, x};
        for (int a = 0; a < r; ++a) row.push_back(y[2 + a]);
        row.push_back(v);
        row.push_back(S);
        row.push_back(T);
        row.push_back(0.5 * piston.mass * v * v + net->internal_energy(S, N, V));
        row.push_back((piston.F_ext ? piston.F_ext(t) : 0.0) * v);
        row.push_back(piston.P_H);
        row.push_back(d.prod_friction + d.prod_chemical);
        row.push_back(S);
        return row;
    };

    rt.entropies = [r](const Vec& y) { return Vec::Constant(1, y[2 + r]); };
    rt.gradient_check_fn = [mix](int n_states, std::uint64_t seed) {
        return mixture_gradient_check(mix, n_states, seed);
    };
    return rt;
}

ModelRuntime build_membrane(const json& p, const json& initial, bool reacting) {
    const IdealMixture mix = make_mixture(p);
    const Vec vols = vec_of(p.at("volumes"));
    const int R = mix.species();

    auto model = std::make_shared<CompartmentModel>();
    model->n_species = R;
    model->g1 = vec_of(p.at("g1"));
    model->g2 = vec_of(p.at("g2"));
    model->P_H = num(p, "P_H");
    model->internal_energy = [mix, vols](double S, const Mat& N) {
        return mix.energy_multi(S, N, vols);
    };
    model->dU_dN = [mix, vols](double S, const Mat& N) {
        return mix.chemical_potentials_multi(S, N, vols);
    };
    model->dU_dS = [mix, vols](double S, const Mat& N) {
        return mix.temperature_multi(S, N, vols);
    };

    std::shared_ptr<ReactionNetwork> net;
    int n_reactions = 0;
    if (reacting) {
        net = std::make_shared<ReactionNetwork>(make_network(p, mix));
        n_reactions = net->n_reactions;
        model->rate_matrices[0] = mat_of(p.at("rate_matrix_r1"));
        model->rate_matrices[1] = mat_of(p.at("rate_matrix_m"));
        model->rate_matrices[2] = mat_of(p.at("rate_matrix_r2"));
    }
    model->validate(n_reactions);

    Mat N0 = mat_of(p.at("N_init"));
    if (initial.contains("N")) N0 = mat_of(initial.at("N"));
    if (N0.rows() != 3 || N0.cols() != R) throw ParseError("membrane N must be 3 x n_species");
    double S_init;
    if (initial.contains("S"))
        S_init = initial.at("S").get<double>();
    else
        S_init = mix.entropy_for_multi(init_num(initial, "T", 1.0), N0, vols);

    ModelRuntime rt;
    rt.config = default_ode_config();
    rt.audit_mass = true;
    rt.thresholds.mass_abs = 1e-10;
    rt.thresholds.energy_rel = 1e-8;  // dU/dt = 0 exactly for the isolated cell
    rt.y0.resize(3 * R + 1);
    for (int k = 0; k < 3; ++k)
        for (int I = 0; I < R; ++I) rt.y0[k * R + I] = N0(k, I);
    rt.y0[3 * R] = S_init;

    auto unpack_N = [R](const Vec& y) {
        Mat N(3, R);
        for (int k = 0; k < 3; ++k)
            for (int I = 0; I < R; ++I) N(k, I) = y[k * R + I];
        return N;
    };

    rt.rhs = [model, net, unpack_N, R, reacting](double, const Vec& y) {
        const Mat N = unpack_N(y);
        const double S = y[3 * R];
        const MembraneDeriv d =
            reacting ? reacting_membrane_rhs(*model, *net, N, S) : membrane_rhs(*model, N, S);
        Vec dy(3 * R + 1);
        for (int k = 0; k < 3; ++k)
            for (int I = 0; I < R; ++I) dy[k * R + I] = d.dN(k, I);
        dy[3 * R] = d.dS;
        return dy;
    };

    Vec molar_mass = Vec::Ones(R);
    if (reacting) molar_mass = net->molar_mass;
    rt.hooks.diagnostics = [model, net, unpack_N, molar_mass, R, reacting](double,
                                                                           const Vec& y) {
        const Mat N = unpack_N(y);
        const double S = y[3 * R];
        const double T = model->temperature(S, N);
        const Mat mu = model->chemical_potentials(S, N);
        const MembraneDeriv d =
            reacting ? reacting_membrane_rhs(*model, *net, N, S) : membrane_rhs(*model, N, S);
        DiagRecord rec;
        rec.E = model->internal_energy(S, N);
        rec.P_W = 0.0;
        rec.P_H = model->P_H;
        rec.I = d.dS - model->P_H / T;
        rec.S_total = S;
        rec.set("T_1", T);
        double mass = 0.0;
        for (int k = 0; k < 3; ++k)
            for (int I = 0; I < R; ++I) mass += molar_mass[I] * N(k, I);
        rec.set("mass", mass);
        double gap_mu = 0.0;
        for (int I = 0; I < R; ++I)
            gap_mu = std::max(gap_mu, mu.col(I).maxCoeff() - mu.col(I).minCoeff());
        rec.set("gap_mu", gap_mu);
        return rec;
    };

    rt.csv_header = {"t"};
    for (int k = 0; k < 3; ++k)
        for (int I = 0; I < R; ++I) {
            static const char* comp[] = {"r1", "m", "r2"};
            rt.csv_header.push_back(std::string("N_") + comp[k] + "_" + std::to_string(I + 1));
        }
    rt.csv_header.insert(rt.csv_header.end(),
                         {"S_1", "T_1", "E", "P_W_ext", "P_H_ext", "I_internal", "S_total"});
    rt.csv_row = [model, net, unpack_N, R, reacting](double t, const Vec& y) {
        const Mat N = unpack_N(y);
        const double S = y[3 * R];
        const double T = model->temperature(S, N);
        const MembraneDeriv d =
            reacting ? reacting_membrane_rhs(*model, *net, N, S) : membrane_rhs(*model, N, S);
        std::vector<double> row{t};
        for (int k = 0; k < 3; ++k)
            for (int I = 0; I < R; ++I) row.push_back(N(k, I));
        row.push_back(S);
        row.push_back(T);
        row.push_back(model->internal_energy(S, N));
        row.push_back(0.0);
        row.push_back(model->P_H);
        row.push_back(d.dS - model->P_H / T);
        row.push_back(S);
        return row;
    };

    rt.entropies = [R](const Vec& y) { return Vec::Constant(1, y[3 * R]); };
    rt.equilibrium_thresholds = {{"gap_mu", 1e-3}};
    rt.gradient_check_fn = [mix](int n_states, std::uint64_t seed) {
        return mixture_gradient_check(mix, n_states, seed);
    };
    return rt;
}

ModelRuntime build_two_piston(const json& p, const json& initial) {
    const double M = num(p, "mass");
    const double a1 = num(p, "alpha1");
    const double a2 = num(p, "alpha2");
    const double ell = num(p, "ell");
    const double N1 = num(p, "moles1");
    const double N2 = num(p, "moles2");
    const double c = num(p, "c");
    const double Rg = num(p, "gas_constant");
    const double l1 = num(p, "lambda1");
    const double l2 = num(p, "lambda2");
    const double kap = num(p, "kappa");
    const std::string formulation = str(p, "formulation");
    const double source_T = num(p, "source_T");
    const double source_kappa = num(p, "source_kappa");

    const double x_ref = 0.5 * ell;
    const PerfectGas gas1 = PerfectGas::at_reference(1.0, N1, a1 * x_ref, c, Rg);
    const PerfectGas gas2 = PerfectGas::at_reference(1.0, N2, a2 * x_ref, c, Rg);

    const double x0 = init_num(initial, "x", 0.7);
    const double v0 = init_num(initial, "v", 0.0);
    const double T1_0 = init_num(initial, "T1", 1.5);
    const double T2_0 = init_num(initial, "T2", 0.8);

    std::vector<HeatSource> sources;
    if (source_T > 0.0 && source_kappa > 0.0) {
        HeatSource src;
        src.T_fixed = source_T;
        src.coupling = Vec::Constant(2, source_kappa);
        sources.push_back(src);
    }

    auto gaps = [=](DiagRecord& rec, double v, double T1, double T2, double p1, double p2) {
        rec.set("p_1", p1);
        rec.set("p_2", p2);
        rec.set("gap_v", std::abs(v));
        rec.set("gap_T_rel", std::abs(T1 - T2) / (0.5 * (T1 + T2)));
        rec.set("gap_p_rel",
                std::abs(p1 * a1 - p2 * a2) / std::max({1e-300, p1 * a1, p2 * a2}));
    };

    if (formulation == "free_energy") {
        auto model = std::make_shared<FreeEnergyModel>();
        model->name = "two_piston_free_energy";
        model->n_sub = 2;
        model->dim = 1;
        model->sources = sources;
        model->kappa = (Mat(2, 2) << 0.0, kap, kap, 0.0).finished();
        auto S1_of = [=](double x, double T) { return gas1.entropy_for(T, N1, a1 * x); };
        auto S2_of = [=](double x, double T) {
            return gas2.entropy_for(T, N2, a2 * (ell - x));
        };
        model->free_lagrangian = [=](const Vec& q, const Vec& v, const Vec& T) {
            const double S1 = S1_of(q[0], T[0]);
            const double S2 = S2_of(q[0], T[1]);
            const double F1 = c * N1 * Rg * T[0] - T[0] * S1;
            const double F2 = c * N2 * Rg * T[1] - T[1] * S2;
            return 0.5 * M * v[0] * v[0] - F1 - F2;
        };
        model->dLf_dq = [=](const Vec& q, const Vec&, const Vec& T) {
            const double p1 = N1 * Rg * T[0] / (a1 * q[0]);
            const double p2 = N2 * Rg * T[1] / (a2 * (ell - q[0]));
            return Vec::Constant(1, p1 * a1 - p2 * a2);
        };
        model->dLf_dv = [=](const Vec&, const Vec& v, const Vec&) {
            return Vec::Constant(1, M * v[0]);
        };
        model->dLf_dT = [=](const Vec& q, const Vec&, const Vec& T) {
            Vec S(2);
            S << S1_of(q[0], T[0]), S2_of(q[0], T[1]);
            return S;
        };
        model->d2Lf_dv2 = [=](const Vec&, const Vec&, const Vec&) {
            return Mat::Constant(1, 1, M);
        };
        model->d2Lf_dvdq = [](const Vec&, const Vec&, const Vec&) { return Mat::Zero(1, 1); };
        model->heat_capacity = [=](const Vec&, const Vec&, const Vec& T) {
            Mat C = Mat::Zero(2, 2);
            C(0, 0) = c * N1 * Rg / T[0];
            C(1, 1) = c * N2 * Rg / T[1];
            return C;
        };
        model->dS_dq = [=](const Vec& q, const Vec&, const Vec&) {
            Mat dSdq(2, 1);
            dSdq(0, 0) = N1 * Rg / q[0];
            dSdq(1, 0) = -N2 * Rg / (ell - q[0]);
            return dSdq;
        };
        model->dS_dv = [](const Vec&, const Vec&, const Vec&) { return Mat::Zero(2, 1); };
        model->frictions = {
            [=](const Vec&, const Vec& v, const Vec&) { return Vec::Constant(1, -l1 * v[0]); },
            [=](const Vec&, const Vec& v, const Vec&) { return Vec::Constant(1, -l2 * v[0]); }};
        model->domain = Box::unbounded(1);
        model->domain.lo[0] = 1e-6;
        model->domain.hi[0] = ell - 1e-6;

        const int nsrc = static_cast<int>(model->sources.size());
        ModelRuntime rt;
        rt.config = default_ode_config();
        rt.y0.resize(4 + nsrc);
        rt.y0 << x0, v0, T1_0, T2_0, Vec::Zero(nsrc);

        auto unpack = [nsrc](const Vec& y) {
            FreeEnergyState s;
            s.q = y.head(1);
            s.v = y.segment(1, 1);
            s.T = y.segment(2, 2);
            s.S_sources = nsrc > 0 ? Vec(y.tail(nsrc)) : Vec();
            return s;
        };
        rt.rhs = [model, unpack, nsrc](double t, const Vec& y) {
            FreeEnergyState s = unpack(y);
            s.t = t;
            const FreeEnergyDeriv d = free_energy_rhs(*model, s);
            Vec dy(4 + nsrc);
            dy.head(1) = d.dq;
            dy.segment(1, 1) = d.dv;
            dy.segment(2, 2) = d.dT;
            if (nsrc > 0) dy.tail(nsrc) = d.dS_sources;
            return dy;
        };
        rt.hooks.diagnostics = [=](double t, const Vec& y) {
            FreeEnergyState s = unpack(y);
            s.t = t;
            DiagRecord rec;
            rec.E = free_energy_total_energy(*model, s);
            const double T1 = s.T[0], T2 = s.T[1];
            const double p1 = N1 * Rg * T1 / (a1 * s.q[0]);
            const double p2 = N2 * Rg * T2 / (a2 * (ell - s.q[0]));
            rec.P_W = 0.0;
            double P_H = 0.0;
            for (const HeatSource& src : model->sources) {
                const Vec kv = src.couplings(s.q, s.T, 2);
                P_H += kv[0] * (src.temperature(0.0) - T1) + kv[1] * (src.temperature(0.0) - T2);
            }
            rec.P_H = P_H;
            rec.I = (l1 / T1 + l2 / T2) * s.v[0] * s.v[0] +
                    kap * (T2 - T1) * (T2 - T1) / (T1 * T2);
            const Vec S = model->entropies(s.q, s.v, s.T);
            rec.S_total = S.sum();
            rec.set("T_1", T1);
            rec.set("T_2", T2);
            rec.set("S_1", S[0]);
            rec.set("S_2", S[1]);
            gaps(rec, s.v[0], T1, T2, p1, p2);
            return rec;
        };
        rt.csv_header = {"t", "x",   "dx",  "S_1", "S_2",     "T_1",     "T_2",
                         "E", "P_W_ext", "P_H_ext", "I_internal", "S_total"};
        rt.csv_row = [diag = rt.hooks.diagnostics](double t, const Vec& y) {
            const DiagRecord rec = diag(t, y);
            return pack_row(t, {y[0], y[1], rec.get("S_1"), rec.get("S_2"), rec.get("T_1"),
                                rec.get("T_2"), rec.E, rec.P_W, rec.P_H, rec.I, rec.S_total});
        };
        rt.entropies = [model, unpack](const Vec& y) {
            const FreeEnergyState s = unpack(y);
            return model->entropies(s.q, s.v, s.T);
        };
        rt.equilibrium_thresholds = {{"gap_v", 1e-4}, {"gap_T_rel", 1e-4}};
        rt.gradient_check_fn = [model](int n_states, std::uint64_t seed) {
            SamplingBox box = box1(0.3, 1.7, -1.0, 1.0, 0.6, 1.8);
            box.S_lo = Vec::Constant(2, 0.6);
            box.S_hi = Vec::Constant(2, 1.8);
            return gradient_check(*model, box, n_states, seed);
        };
        return rt;
    }

    // Entropy-primitive formulation.
    auto model = std::make_shared<NetworkModel>();
    model->name = "two_piston";
    model->n_sub = 2;
    model->dim = 1;
    model->sources = sources;
    model->kappa = (Mat(2, 2) << 0.0, kap, kap, 0.0).finished();
    model->lagrangian = [=](const Vec& q, const Vec& v, const Vec& S) {
        return 0.5 * M * v[0] * v[0] - gas1.energy(S[0], N1, a1 * q[0]) -
               gas2.energy(S[1], N2, a2 * (ell - q[0]));
    };
    model->dL_dq = [=](const Vec& q, const Vec&, const Vec& S) {
        const double p1 = gas1.pressure(S[0], N1, a1 * q[0]);
        const double p2 = gas2.pressure(S[1], N2, a2 * (ell - q[0]));
        return Vec::Constant(1, p1 * a1 - p2 * a2);
    };
    model->dL_dv = [=](const Vec&, const Vec& v, const Vec&) {
        return Vec::Constant(1, M * v[0]);
    };
    model->dL_dS = [=](const Vec& q, const Vec&, const Vec& S) {
        Vec g(2);
        g << -gas1.temperature(S[0], N1, a1 * q[0]),
            -gas2.temperature(S[1], N2, a2 * (ell - q[0]));
        return g;
    };
    model->d2L_dv2 = [=](const Vec&, const Vec&, const Vec&) { return Mat::Constant(1, 1, M); };
    model->d2L_dvdq = [](const Vec&, const Vec&, const Vec&) { return Mat::Zero(1, 1); };
    model->d2L_dvdS = [](const Vec&, const Vec&, const Vec&) { return Mat::Zero(1, 2); };
    model->frictions = {
        [=](const Vec&, const Vec& v, const Vec&) { return Vec::Constant(1, -l1 * v[0]); },
        [=](const Vec&, const Vec& v, const Vec&) { return Vec::Constant(1, -l2 * v[0]); }};
    model->domain = Box::unbounded(1);
    model->domain.lo[0] = 1e-6;
    model->domain.hi[0] = ell - 1e-6;
    DissipationInfo diss;
    diss.friction_zero = (l1 == 0.0 && l2 == 0.0);
    diss.kappa_zero = (kap == 0.0);
    diss.sources_matched = sources.empty();
    model->dissipation = diss;

    NetworkState init;
    init.q = Vec::Constant(1, x0);
    init.v = Vec::Constant(1, v0);
    init.S = Vec(2);
    init.S << gas1.entropy_for(T1_0, N1, a1 * x0), gas2.entropy_for(T2_0, N2, a2 * (ell - x0));
    init.S_sources = Vec::Zero(static_cast<Eigen::Index>(sources.size()));

    ModelRuntime rt = network_runtime(
        model, init, {"x"},
        [=](DiagRecord& rec, const NetworkModel& mdl, const NetworkState& s) {
            const Vec T = mdl.temperatures(s.q, s.v, s.S);
            const double p1 = gas1.pressure(s.S[0], N1, a1 * s.q[0]);
            const double p2 = gas2.pressure(s.S[1], N2, a2 * (ell - s.q[0]));
            gaps(rec, s.v[0], T[0], T[1], p1, p2);
        },
        p.at("track_gamma").get<bool>());
    rt.equilibrium_thresholds = {{"gap_v", 1e-4}, {"gap_T_rel", 1e-4}};
    if (kap == 0.0) rt.equilibrium_thresholds = {{"gap_v", 1e-4}, {"gap_p_rel", 1e-4}};
    rt.gradient_check_fn = [model, ell](int n_states, std::uint64_t seed) {
        SamplingBox box = box1(0.3, ell - 0.3, -1.0, 1.0, -0.5, 0.5);
        box.S_lo = Vec::Constant(2, -0.5);
        box.S_hi = Vec::Constant(2, 0.5);
        return gradient_check(*model, box, n_states, seed);
    };
    return rt;
}

ModelRuntime build_rlc_network(const json& p, const json& initial) {
    const double L1 = num(p, "L1");
    const double L2 = num(p, "L2");
    const double L3 = num(p, "L3");
    const double C0 = num(p, "C0");
    const double R1 = num(p, "R1");
    const double R2 = num(p, "R2");
    const double R3 = num(p, "R3");
    const double u0 = num(p, "u0");
    const double cs = num(p, "cs");
    const double k12 = num(p, "kappa12");
    const double k13 = num(p, "kappa13");
    const double k23 = num(p, "kappa23");
    const double V_amp = num(p, "V_ext");
    const double V_freq = num(p, "V_freq");

    auto model = std::make_shared<NetworkModel>();
    model->name = "rlc_network";
    model->n_sub = 3;
    model->dim = 2;
    model->kappa = (Mat(3, 3) << 0, k12, k13, k12, 0, k23, k13, k23, 0).finished();
    if (p.contains("kappa_matrix") && !p.at("kappa_matrix").empty())
        model->kappa = mat_of(p.at("kappa_matrix"));
    (void)friction_matrix(model->kappa);  // eager symmetry/sign validation
    model->lagrangian = [=](const Vec& q, const Vec& v, const Vec& S) {
        const double i1 = v[0] + v[1];
        double U = 0.0;
        for (int A = 0; A < 3; ++A) U += u0 * std::exp(S[A] / cs);
        return 0.5 * L1 * i1 * i1 + 0.5 * L2 * v[0] * v[0] + 0.5 * L3 * v[1] * v[1] -
               0.5 * q[1] * q[1] / C0 - U;
    };
    model->dL_dq = [=](const Vec& q, const Vec&, const Vec&) {
        Vec g(2);
        g << 0.0, -q[1] / C0;
        return g;
    };
    model->dL_dv = [=](const Vec&, const Vec& v, const Vec&) {
        const double phi1 = L1 * (v[0] + v[1]);
        Vec g(2);
        g << phi1 + L2 * v[0], phi1 + L3 * v[1];
        return g;
    };
    model->dL_dS = [=](const Vec&, const Vec&, const Vec& S) {
        Vec g(3);
        for (int A = 0; A < 3; ++A) g[A] = -(u0 / cs) * std::exp(S[A] / cs);
        return g;
    };
    model->d2L_dv2 = [=](const Vec&, const Vec&, const Vec&) {
        Mat M(2, 2);
        M << L1 + L2, L1, L1, L1 + L3;
        return M;
    };
    model->d2L_dvdq = [](const Vec&, const Vec&, const Vec&) { return Mat::Zero(2, 2); };
    model->d2L_dvdS = [](const Vec&, const Vec&, const Vec&) { return Mat::Zero(2, 3); };
    model->frictions = {
        [=](const Vec&, const Vec& v, const Vec&) {
            const double VR1 = -R1 * (v[0] + v[1]);
            Vec f(2);
            f << VR1, VR1;
            return f;
        },
        [=](const Vec&, const Vec& v, const Vec&) {
            Vec f(2);
            f << -R2 * v[0], 0.0;
            return f;
        },
        [=](const Vec&, const Vec& v, const Vec&) {
            Vec f(2);
            f << 0.0, -R3 * v[1];
            return f;
        }};
    if (V_amp != 0.0)
        model->external_forces = {[=](const Vec&, const Vec&, const Vec&, double t) {
            const double V = V_amp * (V_freq > 0.0 ? std::sin(V_freq * t) : 1.0);
            Vec f(2);
            f << V, V;
            return f;
        }};
    DissipationInfo diss;
    diss.friction_zero = (R1 == 0.0 && R2 == 0.0 && R3 == 0.0);
    diss.kappa_zero = (k12 == 0.0 && k13 == 0.0 && k23 == 0.0);
    diss.sources_matched = true;
    model->dissipation = diss;

    NetworkState init;
    init.q = Vec(2);
    init.q << init_num(initial, "q2", 0.0), init_num(initial, "q3", 1.0);
    init.v = Vec(2);
    init.v << init_num(initial, "i2", 0.0), init_num(initial, "i3", 0.0);
    init.S = Vec::Zero(3);
    if (initial.contains("S")) init.S = vec_of(initial.at("S"));
    init.S_sources = Vec();

    ModelRuntime rt = network_runtime(model, init, {"q2", "q3"});
    rt.gradient_check_fn = [model](int n_states, std::uint64_t seed) {
        SamplingBox box;
        box.q_lo = Vec::Constant(2, -1.0);
        box.q_hi = Vec::Constant(2, 1.0);
        box.v_lo = Vec::Constant(2, -1.0);
        box.v_hi = Vec::Constant(2, 1.0);
        box.S_lo = Vec::Constant(3, -0.5);
        box.S_hi = Vec::Constant(3, 0.5);
        return gradient_check(*model, box, n_states, seed);
    };
    return rt;
}

// Continuum runtimes share the packing y = [n(cell,species)..., m..., s...].
struct ContinuumSetup {
    std::shared_ptr<const EOS> eos;
    std::shared_ptr<const Phenomenology> phen;
    Mat nu;
    Grid1D grid;
    std::function<double(double)> heat_source;
};

Vec pack_continuum(const ContinuumState& state) {
    const int N = state.cells(), K = state.species();
    Vec y(N * K + 2 * N);
    for (int i = 0; i < N; ++i)
        for (int A = 0; A < K; ++A) y[i * K + A] = state.n(i, A);
    y.segment(N * K, N) = state.m;
    y.segment(N * K + N, N) = state.s;
    return y;
}

ContinuumState unpack_continuum(const Vec& y, int N, int K) {
    ContinuumState s;
    s.n.resize(N, K);
    for (int i = 0; i < N; ++i)
        for (int A = 0; A < K; ++A) s.n(i, A) = y[i * K + A];
    s.m = y.segment(N * K, N);
    s.s = y.segment(N * K + N, N);
    return s;
}

ModelRuntime continuum_runtime(const ContinuumSetup& setup, const ContinuumState& init) {
    const int N = setup.grid.n_cells;
    const int K = setup.eos->n_species;
    const auto eos = setup.eos;
    const auto phen = setup.phen;
    const Mat nu = setup.nu;
    const Grid1D grid = setup.grid;
    const auto heat = setup.heat_source;

    ModelRuntime rt;
    rt.continuum = true;
    rt.y0 = pack_continuum(init);
    rt.cfl_dt = cfl_advisory(init, *eos, grid);

    rt.config = default_ode_config(2.0, stable_dt_estimate(init, *eos, *phen, grid));
    rt.config.record_every = 10;

    rt.rhs = [=](double, const Vec& y) {
        const ContinuumState s = unpack_continuum(y, N, K);
        const ContinuumDeriv d = nu.size() ? multicomponent_rhs(s, *eos, *phen, nu, grid, heat)
                                           : nsf_rhs(s, *eos, *phen, grid, heat);
        Vec dy(y.size());
        for (int i = 0; i < N; ++i)
            for (int A = 0; A < K; ++A) dy[i * K + A] = d.dn(i, A);
        dy.segment(N * K, N) = d.dm;
        dy.segment(N * K + N, N) = d.ds;
        return dy;
    };

    rt.hooks.diagnostics = [=](double, const Vec& y) {
        const ContinuumState s = unpack_continuum(y, N, K);
        const FaceFluxes fl = nu.size() ? fluxes_multicomponent(s, *eos, *phen, nu, grid)
                                        : fluxes_nsf(s, *eos, *phen, grid);
        const Vec i_field = clausius_duhem_field(s, fl);
        const Totals tot = totals(s, *eos, grid);
        DiagRecord rec;
        rec.E = tot.energy;
        rec.S_total = tot.entropy;
        rec.P_W = 0.0;
        double P_H = 0.0;
        if (heat)
            for (int i = 0; i < N; ++i)
                P_H += eos->molar_mass.dot(s.n.row(i).transpose()) * heat(grid.x_center(i)) *
                       grid.dx;
        rec.P_H = P_H;
        rec.I = i_field.sum() * grid.dx;
        rec.set("i_min", i_field.minCoeff());
        rec.set("mass", tot.mass);
        for (int A = 0; A < K; ++A)
            rec.set("moles_" + std::to_string(A + 1), tot.moles[A]);
        rec.set("cfl_dt", 0.4 * grid.dx / std::max(fl.max_wave_speed, 1e-300));
        return rec;
    };

    rt.write_snapshot = [=](std::ostream& os, double t, const Vec& y) {
        const ContinuumState s = unpack_continuum(y, N, K);
        const FaceFluxes fl = nu.size() ? fluxes_multicomponent(s, *eos, *phen, nu, grid)
                                        : fluxes_nsf(s, *eos, *phen, grid);
        const Vec i_field = clausius_duhem_field(s, fl);
        os << "x";
        for (int A = 0; A < K; ++A) os << ",n_" << (A + 1);
        os << ",v,s,T,p,i\n";
        for (int i = 0; i < N; ++i) {
            const Vec n_i = s.n.row(i).transpose();
            const double rho = eos->molar_mass.dot(n_i);
            std::vector<double> row{grid.x_center(i)};
            for (int A = 0; A < K; ++A) row.push_back(n_i[A]);
            row.push_back(s.m[i] / rho);
            row.push_back(s.s[i]);
            row.push_back(eos->temperature(n_i, s.s[i]));
            row.push_back(eos->pressure(n_i, s.s[i]));
            row.push_back(i_field[i]);
            os << csv::row(row);
        }
        (void)t;
    };

    rt.csv_header = {"t", "E", "P_W_ext", "P_H_ext", "I_internal", "S_total", "mass", "i_min"};
    rt.csv_row = [rt_hooks = rt.hooks](double t, const Vec& y) {
        const DiagRecord rec = rt_hooks.diagnostics(t, y);
        return std::vector<double>{t,     rec.E,        rec.P_W,        rec.P_H,
                                   rec.I, rec.S_total,  rec.get("mass"), rec.get("i_min")};
    };

    rt.entropies = [N, K](const Vec& y) { return Vec(y.segment(N * K + N, N)); };
    rt.gradient_check_fn = [eos](int n_states, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        double worst = 0.0;
        for (int k = 0; k < n_states; ++k) {
            Vec n(eos->n_species);
            for (int A = 0; A < eos->n_species; ++A) n[A] = 0.4 + 1.6 * uni(rng);
            const double s = -0.5 + 1.5 * uni(rng);
            const double T = eos->temperature(n, s);
            const double T_fd =
                fd::partial([&](double ss) { return eos->energy(n, ss); }, s);
            worst = std::max(worst, std::abs(T - T_fd) / std::max(1.0, std::abs(T)));
            const Vec mu = eos->chemical_potentials(n, s);
            const Vec mu_fd =
                fd::gradient([&](const Vec& nn) { return eos->energy(nn, s); }, n);
            for (int A = 0; A < eos->n_species; ++A)
                worst = std::max(worst,
                                 std::abs(mu[A] - mu_fd[A]) / std::max(1.0, std::abs(mu[A])));
        }
        return worst;
    };
    return rt;
}

ModelRuntime build_nsf1d(const json& p, const json& initial) {
    Grid1D grid;
    grid.n_cells = integer(p, "n_cells");
    grid.dx = num(p, "length") / grid.n_cells;
    grid.boundary = str(p, "boundary") == "walls" ? Boundary::walls : Boundary::periodic;
    grid.validate();

    IdealMixture mix;
    mix.c = Vec::Constant(1, num(p, "c"));
    mix.s0 = Vec::Constant(1, num(p, "s0"));
    mix.R = num(p, "gas_constant");
    mix.n_ref = num(p, "n0");
    const Vec molar_mass = Vec::Constant(1, num(p, "molar_mass"));

    ContinuumSetup setup;
    setup.eos = std::make_shared<EOS>(make_mixture_eos(mix, molar_mass));
    auto phen = std::make_shared<Phenomenology>();
    phen->mu_shear = num(p, "mu");
    phen->zeta_bulk = num(p, "zeta");
    phen->kappa_fourier = num(p, "kappa");
    phen->validate(molar_mass, 1, 0);
    setup.phen = phen;
    setup.grid = grid;
    const double r_const = num(p, "heat_source");
    if (r_const != 0.0) setup.heat_source = [r_const](double) { return r_const; };

    const double rho0 = init_num(initial, "rho0", 1.0);
    const double v_amp = init_num(initial, "v_amp", 0.1);
    const int v_mode = static_cast<int>(init_num(initial, "v_mode", 1));
    const double T_init = init_num(initial, "T", 1.0);

    ContinuumState init_state;
    const int N = grid.n_cells;
    init_state.n.resize(N, 1);
    init_state.m.resize(N);
    init_state.s.resize(N);
    for (int i = 0; i < N; ++i) {
        const double x = grid.x_center(i);
        const double n_i = rho0 / molar_mass[0];
        double v_i;
        if (grid.boundary == Boundary::periodic)
            v_i = v_amp * std::sin(2.0 * M_PI * v_mode * x / grid.length());
        else
            v_i = v_amp * std::sin(M_PI * v_mode * x / grid.length());
        init_state.n(i, 0) = n_i;
        init_state.s[i] = mix.entropy_for(T_init, Vec::Constant(1, n_i), 1.0);
        init_state.m[i] = rho0 * v_i;
    }

    ModelRuntime rt = continuum_runtime(setup, init_state);
    rt.thresholds.energy_rel = 1e-4;
    rt.thresholds.production_floor = -1e-10;
    return rt;
}

ModelRuntime build_multicomponent1d(const json& p, const json& initial) {
    Grid1D grid;
    grid.n_cells = integer(p, "n_cells");
    grid.dx = num(p, "length") / grid.n_cells;
    grid.boundary = str(p, "boundary") == "periodic" ? Boundary::periodic : Boundary::walls;
    grid.validate();

    IdealMixture mix = make_mixture(p);
    const Vec molar_mass = vec_of(p.at("molar_mass"));
    const int K = mix.species();

    ContinuumSetup setup;
    setup.eos = std::make_shared<EOS>(make_mixture_eos(mix, molar_mass));
    auto phen = std::make_shared<Phenomenology>();
    phen->mu_shear = num(p, "mu");
    phen->zeta_bulk = num(p, "zeta");
    phen->kappa_fourier = num(p, "kappa");
    phen->onsager_vector = mat_of(p.at("onsager_vector"));
    phen->onsager_scalar = mat_of(p.at("onsager_scalar"));
    setup.nu = mat_of(p.at("nu"));
    phen->validate(molar_mass, K, static_cast<int>(setup.nu.rows()));
    setup.phen = phen;
    setup.grid = grid;

    const Vec n_base = vec_of(p.at("n_base"));
    const Vec n_pert = vec_of(p.at("n_perturbation"));
    const double T_init = init_num(initial, "T", 1.0);

    ContinuumState init_state;
    const int N = grid.n_cells;
    init_state.n.resize(N, K);
    init_state.m = Vec::Zero(N);
    init_state.s.resize(N);
    for (int i = 0; i < N; ++i) {
        const double x = grid.x_center(i);
        const double shape = grid.boundary == Boundary::walls
                                 ? std::cos(M_PI * x / grid.length())
                                 : std::sin(2.0 * M_PI * x / grid.length());
        Vec n_i(K);
        for (int A = 0; A < K; ++A) n_i[A] = n_base[A] + n_pert[A] * shape;
        init_state.n.row(i) = n_i.transpose();
        init_state.s[i] = mix.entropy_for(T_init, n_i, 1.0);
    }

    ModelRuntime rt = continuum_runtime(setup, init_state);
    rt.audit_mass = true;
    rt.thresholds.mass_abs = 1e-12;
    rt.thresholds.energy_rel = 1e-4;
    rt.thresholds.production_floor = -1e-12;
    return rt;
}

json stoich_defaults() {
    return json{{"nu_fwd", {{1.0, 0.0}}},
                {"nu_bwd", {{0.0, 1.0}}},
                {"molar_mass", {1.0, 1.0}},
                {"rate_matrix", {{1.0}}},
                {"mix_c", {1.5, 1.5}},
                {"mix_s0", {0.0, 0.3}},
                {"gas_constant", 1.0}};
}

std::vector<CatalogEntry> build_catalog() {
    std::vector<CatalogEntry> entries;

    entries.push_back(CatalogEntry{
        "one_cylinder",
        "Gas in a cylinder closed by a massive piston with linear friction and optional "
        "external force / heat power; perfect-gas internal energy.",
        {{"mass", 1.0, "piston mass"},
         {"area", 1.0, "cylinder cross-section"},
         {"moles", 1.0, "mole count of the gas"},
         {"c", 1.5, "perfect-gas heat-capacity factor"},
         {"gas_constant", 1.0, "gas constant R"},
         {"T_ref", 1.0, "temperature at the reference state"},
         {"x_ref", 1.0, "piston position of the reference state"},
         {"lambda", 0.4, "piston friction coefficient"},
         {"F_ext", 0.0, "constant external force"},
         {"P_H", 0.0, "constant external heat power"}},
        [](const json& p, const json& i) { return build_one_cylinder(p, i); }});

    entries.push_back(CatalogEntry{
        "mass_spring",
        "Mass on an entropy-dependent spring with regularized Coulomb friction.",
        {{"mass", 1.0, "mass"},
         {"k0", 1.0, "spring constant at S = 0"},
         {"alpha", 0.02, "relative entropy dependence of the spring constant"},
         {"u0", 1.0, "internal-energy scale"},
         {"cs", 1.0, "internal-energy entropy scale"},
         {"lambda", 0.05, "Coulomb friction magnitude"},
         {"eps_reg", 1e-8, "velocity regularization of the Coulomb law"},
         {"F_ext", 0.0, "constant external force"},
         {"P_H", 0.0, "constant external heat power"},
         {"x_max", 0.0, "travel limit, admissible box (0 = unbounded)"}},
        [](const json& p, const json& i) { return build_mass_spring(p, i); }});

    entries.push_back(CatalogEntry{
        "rlc_series",
        "Series RLC circuit with one entropy variable; resistor heating drives the entropy.",
        {{"L0", 1.0, "inductance"},
         {"C0", 1.0, "capacitance"},
         {"R", 0.3, "resistance"},
         {"beta", 0.0, "cubic flux-linkage coefficient (nonlinear inductor)"},
         {"u0", 1.0, "internal-energy scale"},
         {"cs", 1.0, "internal-energy entropy scale"},
         {"V_ext", 0.0, "voltage source amplitude"},
         {"V_freq", 1.0, "voltage source angular frequency"},
         {"P_H", 0.0, "constant external heat power"}},
        [](const json& p, const json& i) { return build_rlc_series(p, i); }});

    {
        json params = stoich_defaults();
        params["formulation"] = "psi";
        params["V0"] = 1.0;
        params["P_H"] = 0.0;
        params["N_ref"] = {1.2, 0.4};
        std::vector<ParamSpec> specs;
        for (auto it = params.begin(); it != params.end(); ++it)
            specs.push_back({it.key(), it.value(), ""});
        entries.push_back(CatalogEntry{
            "reactor",
            "Isochoric closed reaction network (ideal mixture); run either on degrees of "
            "advancement (formulation=psi) or mole counts (formulation=N). Aliases: "
            "reactor_psi, reactor_N.",
            specs,
            [](const json& p, const json& i) { return build_reactor(p, i); }});
    }

    {
        json params = stoich_defaults();
        params["mass"] = 1.0;
        params["area"] = 1.0;
        params["lambda"] = 0.5;
        params["N_ref"] = {1.2, 0.4};
        params["F_ext"] = 0.0;
        params["P_H"] = 0.0;
        std::vector<ParamSpec> specs;
        for (auto it = params.begin(); it != params.end(); ++it)
            specs.push_back({it.key(), it.value(), ""});
        entries.push_back(CatalogEntry{
            "chem_piston",
            "Reacting ideal mixture inside a piston-cylinder; mechanics, reaction advancement "
            "and entropy evolve together.",
            specs,
            [](const json& p, const json& i) { return build_chem_piston(p, i); }});
    }

    entries.push_back(CatalogEntry{
        "membrane",
        "Single-species diffusion cell: two reservoirs joined by a membrane layer, isolated, "
        "one shared entropy.",
        {{"mix_c", json::array({1.5}), "per-species heat-capacity factors"},
         {"mix_s0", json::array({0.0}), "per-species reference entropies"},
         {"gas_constant", 1.0, "gas constant R"},
         {"volumes", json::array({1.0, 0.4, 1.0}), "compartment volumes (r1, m, r2)"},
         {"g1", json::array({0.8}), "reservoir-1/membrane conductances"},
         {"g2", json::array({0.8}), "membrane/reservoir-2 conductances"},
         {"N_init", json::array({json::array({1.2}), json::array({0.3}), json::array({0.6})}),
          "initial mole table (3 x species)"},
         {"P_H", 0.0, "external heat power"}},
        [](const json& p, const json& i) { return build_membrane(p, i, false); }});

    {
        json params = stoich_defaults();
        params["volumes"] = {1.0, 0.4, 1.0};
        params["g1"] = {0.7, 0.9};
        params["g2"] = {0.9, 0.7};
        params["N_init"] = {{1.0, 0.4}, {0.25, 0.2}, {0.5, 0.8}};
        params["rate_matrix_r1"] = json::array();
        params["rate_matrix_m"] = {{0.5}};
        params["rate_matrix_r2"] = json::array();
        params["P_H"] = 0.0;
        std::vector<ParamSpec> specs;
        for (auto it = params.begin(); it != params.end(); ++it)
            specs.push_back({it.key(), it.value(), ""});
        entries.push_back(CatalogEntry{
            "membrane_reacting",
            "Two-species diffusion cell with a reaction in the membrane layer.",
            specs,
            [](const json& p, const json& i) { return build_membrane(p, i, true); }});
    }

    entries.push_back(CatalogEntry{
        "two_piston",
        "Two gas columns separated by a moving piston assembly; internal heat conduction "
        "(diathermic) or kappa = 0 (adiabatic). formulation selects the entropy or "
        "temperature-primitive equations.",
        {{"mass", 1.0, "total moving mass"},
         {"alpha1", 1.0, "left cylinder section"},
         {"alpha2", 1.0, "right cylinder section"},
         {"ell", 2.0, "total free length"},
         {"moles1", 1.0, "left gas moles"},
         {"moles2", 1.0, "right gas moles"},
         {"c", 1.5, "perfect-gas heat-capacity factor"},
         {"gas_constant", 1.0, "gas constant R"},
         {"lambda1", 0.6, "left piston friction"},
         {"lambda2", 0.6, "right piston friction"},
         {"kappa", 2.0, "piston heat conductivity"},
         {"formulation", "entropy", "entropy | free_energy"},
         {"source_T", 0.0, "external source temperature (0 disables)"},
         {"source_kappa", 0.0, "source coupling to each subsystem"},
         {"track_gamma", false, "integrate the thermal displacements (entropy formulation)"}},
        [](const json& p, const json& i) { return build_two_piston(p, i); }});

    entries.push_back(CatalogEntry{
        "rlc_network",
        "Interconnected circuit: inductor + three resistors + capacitor, three entropy "
        "variables with pairwise heat exchange. Small branch inductances keep the "
        "Lagrangian nondegenerate.",
        {{"L1", 1.0, "main inductance"},
         {"L2", 0.05, "branch inductance in series with R2"},
         {"L3", 0.05, "branch inductance in series with R3"},
         {"C0", 1.0, "capacitance"},
         {"R1", 0.5, "resistance 1"},
         {"R2", 0.5, "resistance 2"},
         {"R3", 0.5, "resistance 3"},
         {"u0", 1.0, "internal-energy scale"},
         {"cs", 1.0, "internal-energy entropy scale"},
         {"kappa12", 0.5, "heat conduction 1-2"},
         {"kappa13", 0.5, "heat conduction 1-3"},
         {"kappa23", 0.5, "heat conduction 2-3"},
         {"V_ext", 0.0, "voltage source amplitude"},
         {"V_freq", 0.0, "voltage source angular frequency (0 = constant)"},
         {"kappa_matrix", json::array(), "full conductivity matrix (overrides the pairwise values)"}},
        [](const json& p, const json& i) { return build_rlc_network(p, i); }});

    entries.push_back(CatalogEntry{
        "nsf1d",
        "1-D compressible viscous heat-conducting flow (finite volume), perfect-gas EOS.",
        {{"n_cells", 128.0, "cell count"},
         {"length", 1.0, "domain length"},
         {"boundary", "periodic", "periodic | walls"},
         {"c", 1.5, "perfect-gas heat-capacity factor"},
         {"gas_constant", 1.0, "gas constant R"},
         {"n0", 1.0, "reference mole density"},
         {"s0", 0.0, "reference entropy per mole"},
         {"molar_mass", 1.0, "molar mass"},
         {"mu", 0.02, "shear viscosity"},
         {"zeta", 0.0, "bulk viscosity"},
         {"kappa", 0.01, "heat conductivity"},
         {"heat_source", 0.0, "uniform heat source r"}},
        [](const json& p, const json& i) { return build_nsf1d(p, i); }});

    {
        json params;
        params["n_cells"] = 96.0;
        params["length"] = 1.0;
        params["boundary"] = "walls";
        params["mix_c"] = {1.5, 1.5};
        params["mix_s0"] = {0.0, 0.3};
        params["gas_constant"] = 1.0;
        params["molar_mass"] = {1.0, 1.0};
        params["nu"] = {{-1.0, 1.0}};
        params["mu"] = 0.02;
        params["zeta"] = 0.0;
        params["kappa"] = 0.0;
        params["onsager_vector"] = {{0.02, 0.0, 0.0}, {0.0, 0.05, -0.05}, {0.0, -0.05, 0.05}};
        params["onsager_scalar"] = {{0.0, 0.0}, {0.0, 0.4}};
        params["n_base"] = {0.6, 0.5};
        params["n_perturbation"] = {0.1, -0.1};
        std::vector<ParamSpec> specs;
        for (auto it = params.begin(); it != params.end(); ++it)
            specs.push_back({it.key(), it.value(), ""});
        entries.push_back(CatalogEntry{
            "multicomponent1d",
            "1-D two-species reacting viscous fluid in a closed box with Onsager-coupled "
            "diffusion, heat transport and chemistry.",
            specs,
            [](const json& p, const json& i) { return build_multicomponent1d(p, i); }});
    }

    return entries;
}

}  // namespace

const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries = build_catalog();
    return entries;
}

ResolvedModel resolve_model(const std::string& name) {
    ResolvedModel resolved;
    std::string lookup = name;
    if (name == "reactor_psi") {
        lookup = "reactor";
        resolved.implied_params["formulation"] = "psi";
    } else if (name == "reactor_N") {
        lookup = "reactor";
        resolved.implied_params["formulation"] = "N";
    }
    for (const CatalogEntry& entry : catalog())
        if (entry.name == lookup) {
            resolved.entry = &entry;
            return resolved;
        }
    return resolved;
}

json merge_params(const CatalogEntry& entry, const json& user) {
    json merged;
    for (const ParamSpec& spec : entry.params) merged[spec.name] = spec.default_value;
    if (user.is_null()) return merged;
    if (!user.is_object()) throw ParseError("params must be an object");
    for (auto it = user.begin(); it != user.end(); ++it) {
        if (!merged.contains(it.key()))
            throw ParseError("unknown parameter '" + it.key() + "' for model " + entry.name);
        merged[it.key()] = it.value();
    }
    return merged;
}

}  // namespace varitherm
