#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "varitherm/core.hpp"
#include "varitherm/diagnostics.hpp"
#include "varitherm/models.hpp"

using namespace varitherm;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

// Mass-spring thermodynamic Lagrangian with k(S) = k0 (1 + alpha S), U = e^S.
SimpleModel spring_model(double m, double k0, double alpha, double lambda = 0.0) {
    SimpleModel model;
    model.dim = 1;
    model.lagrangian = [=](const Vec& q, const Vec& v, double S) {
        return 0.5 * m * v[0] * v[0] - 0.5 * k0 * (1.0 + alpha * S) * q[0] * q[0] -
               std::exp(S);
    };
    if (lambda != 0.0)
        model.friction_force = [lambda](const Vec&, const Vec& v, double) {
            return v1(-lambda * v[0]);
        };
    return model;
}

}  // namespace

TEST_CASE("temperature: entropy-dependent spring, finite-difference oracle") {
    // k0 alpha = 2 at S = 0, x = 1: T = k0 alpha x^2 / 2 + U'(S) = 1 + 1.
    SimpleModel model = spring_model(1.0, 1.0, 2.0);
    SimpleState s;
    s.q = v1(1.0);
    s.v = v1(0.0);
    s.S = 0.0;

    const double h = fd::step(0.0);
    const double fd_T =
        -(model.lagrangian(s.q, s.v, h) - model.lagrangian(s.q, s.v, -h)) / (2.0 * h);
    CHECK(temperature(model, s) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(temperature(model, s) == doctest::Approx(fd_T).epsilon(1e-9));
}

TEST_CASE("temperature: perfect gas at its reference state") {
    const double c = 1.5, R = 1.0, N0 = 2.0, V0 = 1.3, U0 = 0.9;
    PerfectGas gas;
    gas.c = c;
    gas.R = R;
    gas.N0 = N0;
    gas.V0 = V0;
    gas.U0 = U0;
    gas.S0 = 0.4;

    const double T_expected = U0 / (c * N0 * R);
    CHECK(gas.temperature(gas.S0, N0, V0) == doctest::Approx(T_expected).epsilon(1e-14));
    const double T_fd =
        fd::partial([&](double s) { return gas.energy(s, N0, V0); }, gas.S0);
    CHECK(gas.temperature(gas.S0, N0, V0) == doctest::Approx(T_fd).epsilon(1e-9));
}

TEST_CASE("temperature: entropy-independent Lagrangian is rejected") {
    SimpleModel model;
    model.dim = 1;
    model.lagrangian = [](const Vec& q, const Vec& v, double) {
        return 0.5 * v[0] * v[0] - 0.5 * q[0] * q[0];
    };
    SimpleState s;
    s.q = v1(1.0);
    s.v = v1(0.0);
    s.S = 0.0;
    CHECK_THROWS_AS(temperature(model, s), NonPositiveTemperature);
}

TEST_CASE("energy: kinetic plus potential") {
    SimpleModel model;
    model.dim = 1;
    model.lagrangian = [](const Vec& q, const Vec& v, double S) {
        return 0.5 * 2.0 * v[0] * v[0] - (4.0 + q[0] * 0.0 + S * 0.0 + 1.0);  // U = 5
    };
    SimpleState s;
    s.q = v1(0.0);
    s.v = v1(3.0);
    s.S = 0.0;
    CHECK(energy(model, s) == doctest::Approx(14.0).epsilon(1e-9));

    s.v = v1(0.0);
    CHECK(energy(model, s) == doctest::Approx(-model.lagrangian(s.q, s.v, s.S)).epsilon(1e-9));
}

TEST_CASE("energy: linear RLC stored energy") {
    const double L0 = 2.0, C0 = 0.5;
    SimpleModel model;
    model.dim = 1;
    model.lagrangian = [=](const Vec& q, const Vec& v, double S) {
        return 0.5 * L0 * v[0] * v[0] - 0.5 * q[0] * q[0] / C0 - std::exp(S);
    };
    SimpleState s;
    s.q = v1(0.7);
    s.v = v1(1.3);
    s.S = 0.2;
    const double expected =
        0.5 * L0 * 1.3 * 1.3 + 0.5 * 0.7 * 0.7 / C0 + std::exp(0.2);
    CHECK(energy(model, s) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("internal production: Coulomb, zero, linear") {
    SimpleModel model = spring_model(1.0, 1.0, 0.0);
    // T = U'(S) = e^S; pick S = 0 so T = 1.
    model.friction_force = [](const Vec&, const Vec& v, double) {
        return v1(-0.5 * v[0] / std::abs(v[0]));
    };
    SimpleState s;
    s.q = v1(0.3);
    s.v = v1(2.0);
    s.S = 0.0;
    CHECK(internal_production(model, s) == doctest::Approx(1.0).epsilon(1e-9));

    model.friction_force = {};
    CHECK(internal_production(model, s) == 0.0);

    model.friction_force = [](const Vec&, const Vec& v, double) { return v1(-3.0 * v[0]); };
    s.S = std::log(4.0);  // T = 4
    CHECK(internal_production(model, s) == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("simple_rhs: one-cylinder equilibrium fixed point") {
    const PerfectGas gas = PerfectGas::at_reference(1.0, 1.0, 1.0, 1.5, 1.0);
    SimpleModel model;
    model.dim = 1;
    const double area = 1.0;
    model.lagrangian = [=](const Vec& q, const Vec& v, double S) {
        return 0.5 * v[0] * v[0] - gas.energy(S, 1.0, area * q[0]);
    };
    // Counterbalance the gas pressure exactly.
    model.external_force = [=](const Vec& q, const Vec&, double S, double) {
        return v1(-gas.pressure(S, 1.0, area * q[0]) * area);
    };
    model.domain = Box::unbounded(1);
    model.domain.lo[0] = 1e-9;

    SimpleState s;
    s.q = v1(1.0);
    s.v = v1(0.0);
    s.S = 0.0;
    const SimpleDeriv d = simple_rhs(model, s);
    CHECK(d.dq[0] == 0.0);
    CHECK(d.dv[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(d.dS == 0.0);
}

TEST_CASE("simple_rhs: reversible motion keeps entropy frozen") {
    SimpleModel model = spring_model(1.0, 1.0, 0.0);
    SimpleState s;
    s.q = v1(0.8);
    s.v = v1(-1.1);
    s.S = 0.1;
    CHECK(simple_rhs(model, s).dS == 0.0);
}

TEST_CASE("simple_rhs: harmonic oscillator oracle") {
    SimpleModel model = spring_model(1.0, 1.0, 0.0);
    SimpleState s;
    s.q = v1(1.0);
    s.v = v1(0.0);
    s.S = 0.0;
    const SimpleDeriv d = simple_rhs(model, s);
    CHECK(d.dv[0] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(d.dS == 0.0);
}

TEST_CASE("second law: dissipative friction produces entropy at random states") {
    SimpleModel model = spring_model(1.2, 0.9, 0.1, 0.7);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        SimpleState s;
        s.q = v1(uni(rng));
        s.v = v1(2.0 * uni(rng));
        s.S = 0.4 * uni(rng);
        if (s.S < -0.4) continue;
        const SimpleDeriv d = simple_rhs(model, s);
        CHECK(d.dS >= 0.0);
        CHECK(internal_production(model, s) >= 0.0);
    }
}

TEST_CASE("gradient consistency: analytic partials of catalog models match FD") {
    // Catalog-built one_cylinder model partials, randomized states.
    const auto resolved = resolve_model("one_cylinder");
    REQUIRE(resolved.entry != nullptr);
    const auto merged = merge_params(*resolved.entry, {});
    ModelRuntime rt = resolved.entry->build(merged, nlohmann::json::object());
    REQUIRE(bool(rt.gradient_check_fn));
    CHECK(rt.gradient_check_fn(50, 777) <= 1e-6);
}

TEST_CASE("special-form split: internal force and two-way energy exchange") {
    // L = K(v) - U(q, S): dE_mech/dt + dU/dt must reassemble dE/dt = P_W + P_H.
    const double m = 1.4, k = 2.2;
    auto Ufun = [=](double x, double S) { return 0.5 * k * x * x + std::exp(S); };
    SimpleModel model;
    model.dim = 1;
    model.lagrangian = [=](const Vec& q, const Vec& v, double S) {
        return 0.5 * m * v[0] * v[0] - Ufun(q[0], S);
    };
    model.friction_force = [](const Vec&, const Vec& v, double) { return v1(-0.3 * v[0]); };
    model.external_force = [](const Vec&, const Vec&, double, double) { return v1(0.2); };
    model.heat_power = [](const Vec&, const Vec&, double, double) { return 0.05; };

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        SimpleState s;
        s.q = v1(uni(rng));
        s.v = v1(uni(rng));
        s.S = 0.3 * uni(rng);
        const SimpleDeriv d = simple_rhs(model, s);
        const double T = temperature(model, s);

        // F_int = -dU/dq.
        const double F_int = -k * s.q[0];
        const double F_fr = -0.3 * s.v[0];
        const double F_ext = 0.2;
        const double P_H = 0.05;

        const double dE_mech = (F_int + F_fr + F_ext) * s.v[0];
        const double dU = std::exp(s.S) * d.dS + k * s.q[0] * s.v[0];
        const double dE = dE_mech + dU;
        CHECK(dE == doctest::Approx(F_ext * s.v[0] + P_H).epsilon(1e-10));
        // Entropy equation: T dS/dt = -<F_fr, v> + P_H.
        CHECK(T * d.dS == doctest::Approx(-F_fr * s.v[0] + P_H).epsilon(1e-10));
    }
}

TEST_CASE("nonlinear inductor: cubic flux linkage stays energy-consistent") {
    const auto resolved = resolve_model("rlc_series");
    REQUIRE(resolved.entry != nullptr);
    const auto merged = merge_params(*resolved.entry, nlohmann::json{{"beta", 0.2}});
    ModelRuntime rt = resolved.entry->build(merged, nlohmann::json::object());
    CHECK(rt.gradient_check_fn(60, 2024) <= 1e-6);

    IntegratorConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 5.0;
    cfg.record_every = 1;
    const Trajectory traj = simulate(rt.rhs, rt.y0, cfg, rt.hooks);
    CHECK(energy_audit(traj) <= 1e-6);
    CHECK(second_law_audit(traj) >= -1e-12);
}

TEST_CASE("admissible domain: cylinder volume must stay positive") {
    const auto resolved = resolve_model("one_cylinder");
    const auto merged = merge_params(*resolved.entry, {});
    ModelRuntime rt = resolved.entry->build(merged, nlohmann::json::object());
    Vec y = rt.y0;
    y[0] = -0.2;  // piston through the cylinder floor
    CHECK_THROWS_AS(rt.rhs(0.0, y), DomainError);
}
