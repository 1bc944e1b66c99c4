#include "varitherm/continuum1d.hpp"

namespace varitherm {

double EOS::temperature(const Vec& n, double s) const {
    const double T = dE_ds ? dE_ds(n, s)
                           : fd::partial([&](double ss) { return energy(n, ss); }, s);
    if (!(T > 0.0)) throw NonPositiveTemperature("EOS temperature <= 0");
    return T;
}

Vec EOS::chemical_potentials(const Vec& n, double s) const {
    if (dE_dn) return dE_dn(n, s);
    return fd::gradient([&](const Vec& nn) { return energy(nn, s); }, n);
}

double EOS::pressure(const Vec& n, double s) const {
    return n.dot(chemical_potentials(n, s)) + s * temperature(n, s) - energy(n, s);
}

double EOS::sound_speed(const Vec& n, double s) const {
    const double rho = molar_mass.dot(n);
    if (!(rho > 0.0)) throw NonPositiveDensity();
    const double h = 1e-6;
    const double pp = pressure((1.0 + h) * n, (1.0 + h) * s);
    const double pm = pressure((1.0 - h) * n, (1.0 - h) * s);
    const double c2 = (pp - pm) / (2.0 * h * rho);
    return c2 > 0.0 ? std::sqrt(c2) : 0.0;
}

void Phenomenology::validate(const Vec& molar_mass, int n_species, int n_reactions) const {
    if (mu_shear < 0.0 || zeta_bulk < 0.0 || kappa_fourier < 0.0)
        throw InvalidOnsager("scalar transport coefficients must be nonnegative");
    if (onsager_vector.size() != 0) {
        if (onsager_vector.rows() != n_species + 1 || onsager_vector.cols() != n_species + 1)
            throw InvalidOnsager("vector Onsager block must be (K+1) x (K+1)");
        if (!is_symmetric(onsager_vector))
            throw InvalidOnsager("vector Onsager block must be symmetric");
        if (!is_psd(onsager_vector))
            throw InvalidOnsager("vector Onsager block must be positive semidefinite");
        for (Eigen::Index j = 0; j < onsager_vector.cols(); ++j) {
            double mass_row = 0.0;
            for (int A = 0; A < n_species; ++A) mass_row += molar_mass[A] * onsager_vector(1 + A, j);
            if (std::abs(mass_row) > 1e-12)
                throw InvalidOnsager("mass-consistency rows M^A L_A* must vanish");
        }
    }
    if (onsager_scalar.size() != 0) {
        if (onsager_scalar.rows() != n_reactions + 1 || onsager_scalar.cols() != n_reactions + 1)
            throw InvalidOnsager("scalar Onsager block must be (r+1) x (r+1)");
        if (!is_symmetric(onsager_scalar))
            throw InvalidOnsager("scalar Onsager block must be symmetric");
        if (!is_psd(onsager_scalar))
            throw InvalidOnsager("scalar Onsager block must be positive semidefinite");
    }
}

namespace {

// Extended cell arrays with two ghost layers. Ext index j holds cell j-2.
struct ExtFields {
    Mat U;    // (N+4) x (K+2) conserved components [n_1..n_K, m, s]
    Vec rho, v, T, p;
    Mat mu;   // (N+4) x K
    Mat aff;  // (N+4) x r (empty when no reactions)
};

ExtFields build_ext(const ContinuumState& state, const EOS& eos, const Mat& nu,
                    const Grid1D& grid) {
    const int N = grid.n_cells;
    const int K = eos.n_species;
    if (state.cells() != N || state.species() != K || state.m.size() != N ||
        state.s.size() != N)
        throw DimensionMismatch("continuum state does not match grid/EOS");

    ExtFields e;
    e.U.resize(N + 4, K + 2);
    auto set_row = [&](int j, const Vec& n_row, double m, double s) {
        e.U.block(j, 0, 1, K) = n_row.transpose();
        e.U(j, K) = m;
        e.U(j, K + 1) = s;
    };
    for (int i = 0; i < N; ++i) set_row(i + 2, state.n.row(i).transpose(), state.m[i], state.s[i]);
    if (grid.boundary == Boundary::periodic) {
        set_row(0, state.n.row(N - 2).transpose(), state.m[N - 2], state.s[N - 2]);
        set_row(1, state.n.row(N - 1).transpose(), state.m[N - 1], state.s[N - 1]);
        set_row(N + 2, state.n.row(0).transpose(), state.m[0], state.s[0]);
        set_row(N + 3, state.n.row(1).transpose(), state.m[1], state.s[1]);
    } else {
        // Mirror ghosts: density and entropy even, momentum odd (no-slip wall).
        set_row(1, state.n.row(0).transpose(), -state.m[0], state.s[0]);
        set_row(0, state.n.row(1).transpose(), -state.m[1], state.s[1]);
        set_row(N + 2, state.n.row(N - 1).transpose(), -state.m[N - 1], state.s[N - 1]);
        set_row(N + 3, state.n.row(N - 2).transpose(), -state.m[N - 2], state.s[N - 2]);
    }

    const int M = N + 4;
    e.rho.resize(M);
    e.v.resize(M);
    e.T.resize(M);
    e.p.resize(M);
    e.mu.resize(M, K);
    const int r = static_cast<int>(nu.rows());
    if (r > 0) e.aff.resize(M, r);
    for (int j = 0; j < M; ++j) {
        const Vec n_j = e.U.block(j, 0, 1, K).transpose();
        const double s_j = e.U(j, K + 1);
        e.rho[j] = eos.molar_mass.dot(n_j);
        if (!(e.rho[j] > 0.0)) throw NonPositiveDensity("cell density <= 0");
        e.v[j] = e.U(j, K) / e.rho[j];
        e.T[j] = eos.temperature(n_j, s_j);
        const Vec mu_j = eos.chemical_potentials(n_j, s_j);
        e.mu.row(j) = mu_j.transpose();
        e.p[j] = n_j.dot(mu_j) + s_j * e.T[j] - eos.energy(n_j, s_j);
        if (r > 0) e.aff.row(j) = (-(nu * mu_j)).transpose();
    }
    return e;
}

struct ComputeResult {
    Mat adv;  // (N+1) x (K+2) advective fluxes at faces
    FaceFluxes fluxes;
    Mat j_react;  // N x r reaction rates j_a per cell (empty when r = 0)
};

ComputeResult compute_fluxes(const ContinuumState& state, const EOS& eos,
                             const Phenomenology& phen, const Mat& nu, const Grid1D& grid) {
    grid.validate();
    const int N = grid.n_cells;
    const int K = eos.n_species;
    const int r = static_cast<int>(nu.rows());
    phen.validate(eos.molar_mass, K, r);
    const ExtFields e = build_ext(state, eos, nu, grid);

    // Unlimited central slopes for the advective reconstruction.
    Mat slope = Mat::Zero(N + 4, K + 2);
    for (int j = 1; j <= N + 2; ++j) slope.row(j) = 0.5 * (e.U.row(j + 1) - e.U.row(j - 1));

    ComputeResult res;
    res.adv.resize(N + 1, K + 2);
    res.fluxes.sigma_fr = Vec::Zero(N + 1);
    res.fluxes.j_S = Vec::Zero(N + 1);
    res.fluxes.j_A = Mat::Zero(N + 1, K);
    res.fluxes.production = Vec::Zero(N);
    res.fluxes.temperature = e.T.segment(2, N);
    res.fluxes.max_wave_speed = 0.0;
    if (r > 0) res.j_react = Mat::Zero(N, r);

    const bool has_vec = phen.onsager_vector.size() != 0;
    const bool has_sc = phen.onsager_scalar.size() != 0;
    Vec prod_face = Vec::Zero(N + 1);

    auto flux_of = [&](const Vec& u) {
        const Vec n_f = u.head(K);
        const double s_f = u[K + 1];
        const double rho_f = eos.molar_mass.dot(n_f);
        if (!(rho_f > 0.0)) throw NonPositiveDensity("face density <= 0");
        const double v_f = u[K] / rho_f;
        const double p_f = eos.pressure(n_f, s_f);
        const double c_f = eos.sound_speed(n_f, s_f);
        Vec F(K + 2);
        F.head(K) = n_f * v_f;
        F[K] = u[K] * v_f + p_f;
        F[K + 1] = s_f * v_f;
        return std::make_pair(F, std::abs(v_f) + c_f);
    };

    for (int f = 0; f <= N; ++f) {
        const int jl = f + 1, jr = f + 2;  // ext indices of the adjacent cells
        const Vec uL = (e.U.row(jl) + 0.5 * slope.row(jl)).transpose();
        const Vec uR = (e.U.row(jr) - 0.5 * slope.row(jr)).transpose();
        const auto [FL, aL] = flux_of(uL);
        const auto [FR, aR] = flux_of(uR);
        const double alpha = std::max(aL, aR);
        res.fluxes.max_wave_speed = std::max(res.fluxes.max_wave_speed, alpha);
        res.adv.row(f) = (0.5 * (FL + FR) - 0.5 * alpha * (uR - uL)).transpose();

        // Dissipative fluxes from cell-centered gradients across the face.
        const double dv = (e.v[jr] - e.v[jl]) / grid.dx;
        const double dT = (e.T[jr] - e.T[jl]) / grid.dx;
        const double T_f = 0.5 * (e.T[jl] + e.T[jr]);

        double sigma = (4.0 * phen.mu_shear / 3.0 + phen.zeta_bulk) * dv;
        double jS = -(phen.kappa_fourier / T_f) * dT;
        double prod = (4.0 * phen.mu_shear / 3.0 + phen.zeta_bulk) * dv * dv +
                      phen.kappa_fourier * dT * dT / T_f;

        if (has_vec) {
            Vec y(K + 1);
            y[0] = dT;
            for (int A = 0; A < K; ++A) y[1 + A] = (e.mu(jr, A) - e.mu(jl, A)) / grid.dx;
            const Vec Jv = -(phen.onsager_vector * y);
            jS += Jv[0];
            for (int A = 0; A < K; ++A) res.fluxes.j_A(f, A) = Jv[1 + A];
            prod += y.dot(phen.onsager_vector * y);
        }
        if (has_sc && r > 0) {
            const Vec A_f = 0.5 * (e.aff.row(jl) + e.aff.row(jr)).transpose();
            sigma += phen.onsager_scalar(0, 0) / 9.0 * dv;
            for (int a = 0; a < r; ++a) sigma += phen.onsager_scalar(0, 1 + a) / 3.0 * A_f[a];
        } else if (has_sc) {
            sigma += phen.onsager_scalar(0, 0) / 9.0 * dv;
        }
        res.fluxes.sigma_fr[f] = sigma;
        res.fluxes.j_S[f] = jS;
        prod_face[f] = prod;
    }

    // Cell production: face-average of the face quadratic forms plus the
    // scalar-block form at the cell (bulk viscosity / chemistry coupling).
    for (int i = 0; i < N; ++i) {
        double prod = 0.5 * (prod_face[i] + prod_face[i + 1]);
        if (has_sc) {
            const int j = i + 2;
            const double divv = (e.v[j + 1] - e.v[j - 1]) / (2.0 * grid.dx);
            Vec x(r + 1);
            x[0] = divv / 3.0;
            for (int a = 0; a < r; ++a) x[1 + a] = e.aff(j, a);
            prod += x.dot(phen.onsager_scalar * x);
            if (r > 0) {
                const Vec j_a = phen.onsager_scalar.block(1, 0, r, r + 1) * x;
                res.j_react.row(i) = j_a.transpose();
            }
        }
        res.fluxes.production[i] = prod;
    }
    return res;
}

ContinuumDeriv assemble_rhs(const ContinuumState& state, const EOS& eos,
                            const Phenomenology& phen, const Mat& nu, const Grid1D& grid,
                            const std::function<double(double)>& heat_source) {
    const int N = grid.n_cells;
    const int K = eos.n_species;
    const int r = static_cast<int>(nu.rows());
    const ComputeResult res = compute_fluxes(state, eos, phen, nu, grid);

    ContinuumDeriv d;
    d.dn = Mat::Zero(N, K);
    d.dm = Vec::Zero(N);
    d.ds = Vec::Zero(N);
    d.max_wave_speed = res.fluxes.max_wave_speed;

    for (int i = 0; i < N; ++i) {
        for (int A = 0; A < K; ++A) {
            d.dn(i, A) = -(res.adv(i + 1, A) - res.adv(i, A)) / grid.dx -
                         (res.fluxes.j_A(i + 1, A) - res.fluxes.j_A(i, A)) / grid.dx;
        }
        if (r > 0) {
            for (int A = 0; A < K; ++A)
                for (int a = 0; a < r; ++a) d.dn(i, A) += res.j_react(i, a) * nu(a, A);
        }
        d.dm[i] = -(res.adv(i + 1, K) - res.adv(i, K)) / grid.dx +
                  (res.fluxes.sigma_fr[i + 1] - res.fluxes.sigma_fr[i]) / grid.dx;
        double source = res.fluxes.production[i];
        if (heat_source) {
            const double rho_i = eos.molar_mass.dot(state.n.row(i).transpose());
            source += rho_i * heat_source(grid.x_center(i));
        }
        d.ds[i] = -(res.adv(i + 1, K + 1) - res.adv(i, K + 1)) / grid.dx -
                  (res.fluxes.j_S[i + 1] - res.fluxes.j_S[i]) / grid.dx +
                  source / res.fluxes.temperature[i];
    }
    return d;
}

}  // namespace

FaceFluxes fluxes_nsf(const ContinuumState& state, const EOS& eos, const Phenomenology& phen,
                      const Grid1D& grid) {
    return compute_fluxes(state, eos, phen, Mat(), grid).fluxes;
}

FaceFluxes fluxes_multicomponent(const ContinuumState& state, const EOS& eos,
                                 const Phenomenology& phen, const Mat& nu, const Grid1D& grid) {
    return compute_fluxes(state, eos, phen, nu, grid).fluxes;
}

ContinuumDeriv nsf_rhs(const ContinuumState& state, const EOS& eos, const Phenomenology& phen,
                       const Grid1D& grid, const std::function<double(double)>& heat_source) {
    return assemble_rhs(state, eos, phen, Mat(), grid, heat_source);
}

ContinuumDeriv multicomponent_rhs(const ContinuumState& state, const EOS& eos,
                                  const Phenomenology& phen, const Mat& nu, const Grid1D& grid,
                                  const std::function<double(double)>& heat_source) {
    if (nu.size() != 0) {
        if (nu.cols() != eos.n_species)
            throw DimensionMismatch("stoichiometry columns != n_species");
        const Vec mass_balance = nu * eos.molar_mass;
        if (mass_balance.cwiseAbs().maxCoeff() > 1e-12)
            throw StoichiometryMassViolation("Lavoisier: M^A nu^a_A != 0");
    }
    return assemble_rhs(state, eos, phen, nu, grid, heat_source);
}

Vec clausius_duhem_field(const ContinuumState& state, const FaceFluxes& fluxes) {
    if (fluxes.production.size() != state.cells())
        throw DimensionMismatch("fluxes do not match state");
    return fluxes.production.cwiseQuotient(fluxes.temperature);
}

Totals totals(const ContinuumState& state, const EOS& eos, const Grid1D& grid) {
    grid.validate();
    Totals tot;
    tot.moles = Vec::Zero(eos.n_species);
    for (int i = 0; i < state.cells(); ++i) {
        const Vec n_i = state.n.row(i).transpose();
        const double rho_i = eos.molar_mass.dot(n_i);
        if (!(rho_i > 0.0)) throw NonPositiveDensity();
        const double v_i = state.m[i] / rho_i;
        tot.energy += (0.5 * rho_i * v_i * v_i + eos.energy(n_i, state.s[i])) * grid.dx;
        tot.entropy += state.s[i] * grid.dx;
        tot.moles += n_i * grid.dx;
    }
    tot.mass = eos.molar_mass.dot(tot.moles);
    return tot;
}

double cfl_advisory(const ContinuumState& state, const EOS& eos, const Grid1D& grid) {
    double speed = 0.0;
    for (int i = 0; i < state.cells(); ++i) {
        const Vec n_i = state.n.row(i).transpose();
        const double rho_i = eos.molar_mass.dot(n_i);
        const double v_i = state.m[i] / rho_i;
        speed = std::max(speed, std::abs(v_i) + eos.sound_speed(n_i, state.s[i]));
    }
    return speed > 0.0 ? 0.4 * grid.dx / speed : std::numeric_limits<double>::infinity();
}

double stable_dt_estimate(const ContinuumState& state, const EOS& eos,
                          const Phenomenology& phen, const Grid1D& grid) {
    double dt = cfl_advisory(state, eos, grid);
    const bool has_vec = phen.onsager_vector.size() != 0;
    const bool has_sc = phen.onsager_scalar.size() != 0;
    double nu_max = 0.0;
    for (int i = 0; i < state.cells(); ++i) {
        const Vec n_i = state.n.row(i).transpose();
        const double s_i = state.s[i];
        const double rho = eos.molar_mass.dot(n_i);
        const double T = eos.temperature(n_i, s_i);

        double nu = (4.0 * phen.mu_shear / 3.0 + phen.zeta_bulk) / rho;
        if (has_sc) nu += phen.onsager_scalar(0, 0) / 9.0 / rho;

        // Entropy diffusivity: (kappa/T + L_SS) dT/ds.
        const double hs = fd::step(s_i);
        const double dTds =
            (eos.temperature(n_i, s_i + hs) - eos.temperature(n_i, s_i - hs)) / (2.0 * hs);
        double jS_coef = phen.kappa_fourier / T;
        if (has_vec) jS_coef += std::abs(phen.onsager_vector(0, 0));
        nu += jS_coef * std::max(dTds, 0.0);

        // Species diffusivity bound: ||L|| times the steepest dmu/dn.
        if (has_vec) {
            const double L_max =
                phen.onsager_vector.bottomRightCorner(eos.n_species, eos.n_species)
                    .cwiseAbs()
                    .maxCoeff();
            double dmu_max = 0.0;
            for (int A = 0; A < eos.n_species; ++A) {
                Vec np = n_i;
                const double hn = fd::step(n_i[A]);
                np[A] = n_i[A] + hn;
                const double mup = eos.chemical_potentials(np, s_i)[A];
                np[A] = n_i[A] - hn;
                const double mum = eos.chemical_potentials(np, s_i)[A];
                dmu_max = std::max(dmu_max, std::abs(mup - mum) / (2.0 * hn));
            }
            nu += L_max * dmu_max * eos.n_species;
        }
        nu_max = std::max(nu_max, nu);
    }
    if (nu_max > 0.0) dt = std::min(dt, 0.4 * grid.dx * grid.dx / nu_max);
    return dt;
}

}  // namespace varitherm
