#include "varitherm/chemistry.hpp"

namespace varitherm {

void ReactionNetwork::validate() const {
    if (nu_fwd.rows() != n_reactions || nu_fwd.cols() != n_species ||
        nu_bwd.rows() != n_reactions || nu_bwd.cols() != n_species)
        throw DimensionMismatch("stoichiometry shape must be n_reactions x n_species");
    if (molar_mass.size() != n_species)
        throw DimensionMismatch("molar mass vector length != n_species");
    if ((nu_fwd.array() < 0.0).any() || (nu_bwd.array() < 0.0).any())
        throw InvariantViolation("stoichiometric coefficients must be nonnegative");
    for (Eigen::Index I = 0; I < n_species; ++I)
        if (!(molar_mass[I] > 0.0)) throw InvariantViolation("molar masses must be positive");
    if (nu.rows() != n_reactions || (nu - (nu_bwd - nu_fwd)).cwiseAbs().maxCoeff() > 0.0)
        throw InvariantViolation("nu must equal nu_bwd - nu_fwd");
    const Vec mass_balance = nu * molar_mass;
    if (mass_balance.cwiseAbs().maxCoeff() > 1e-12)
        throw StoichiometryMassViolation("Lavoisier: sum_I nu^a_I M^I != 0");
    if (rate_matrix) {
        const Mat L = rate_matrix(Vec::Ones(n_species), 0.0);
        if (L.rows() != n_reactions || L.cols() != n_reactions)
            throw DimensionMismatch("rate matrix must be n_reactions x n_reactions");
        if (!is_symmetric(L)) throw InvariantViolation("rate matrix must be symmetric");
        if (!is_psd(L)) throw InvariantViolation("rate matrix must be positive semidefinite");
    }
}

Vec ReactionNetwork::chemical_potentials(double S, const Vec& N, double V) const {
    if (dU_dN) return dU_dN(S, N, V);
    return fd::gradient([&](const Vec& n) { return internal_energy(S, n, V); }, N);
}

double ReactionNetwork::temperature(double S, const Vec& N, double V) const {
    const double T = dU_dS ? dU_dS(S, N, V)
                           : fd::partial([&](double s) { return internal_energy(s, N, V); }, S);
    if (!(T > 0.0)) throw NonPositiveTemperature();
    return T;
}

double ReactionNetwork::pressure(double S, const Vec& N, double V) const {
    if (dU_dV) return -dU_dV(S, N, V);
    return -fd::partial([&](double v) { return internal_energy(S, N, v); }, V);
}

Mat ReactionNetwork::rates(const Vec& N, double S) const {
    if (!rate_matrix) return Mat::Zero(n_reactions, n_reactions);
    return rate_matrix(N, S);
}

Vec ReactionNetwork::flux(const Vec& N, double S, const Vec& A) const {
    if (rate_flux) return rate_flux(N, S, A);
    return rates(N, S) * A;
}

Vec affinity(const ReactionNetwork& net, const Vec& mu) {
    if (mu.size() != net.n_species)
        throw DimensionMismatch("chemical potential vector length != n_species");
    return -(net.nu * mu);
}

void check_moles(const Vec& N) {
    for (Eigen::Index I = 0; I < N.size(); ++I) {
        if (!(N[I] >= -kMoleTol)) throw NegativeMoles();
    }
}

Vec moles_from_psi(const ReactionNetwork& net, const Vec& psi, const Vec& N_ref) {
    if (psi.size() != net.n_reactions)
        throw DimensionMismatch("advancement vector length != n_reactions");
    return N_ref + net.nu.transpose() * psi;
}

PsiDeriv reactor_rhs_psi(const ReactionNetwork& net, const Vec& psi, double S,
                         const ReactorParams& params) {
    if (!(params.V0 > 0.0)) throw NegativeVolume();
    const Vec N = moles_from_psi(net, psi, params.N_ref);
    check_moles(N);
    const double T = net.temperature(S, N, params.V0);
    const Vec mu = net.chemical_potentials(S, N, params.V0);
    const Vec A = affinity(net, mu);

    PsiDeriv d;
    d.dpsi = net.rates(N, S) * A;
    d.dS = (d.dpsi.dot(A) + params.P_H) / T;
    return d;
}

NDeriv reactor_rhs_N(const ReactionNetwork& net, const Vec& N, double S, double P_H,
                     double V0) {
    if (!(V0 > 0.0)) throw NegativeVolume();
    if (N.size() != net.n_species) throw DimensionMismatch("mole vector length != n_species");
    check_moles(N);
    const double T = net.temperature(S, N, V0);
    const Vec mu = net.chemical_potentials(S, N, V0);
    const Vec A = affinity(net, mu);
    const Vec J = net.flux(N, S, A);

    NDeriv d;
    d.dN = net.nu.transpose() * J;
    d.dS = (J.dot(A) + P_H) / T;
    d.dW = mu;
    d.dnu = -A;
    return d;
}

ChemoMechDeriv chemo_mechanical_rhs(const ReactionNetwork& net, const PistonParams& piston,
                                    double x, double v, const Vec& psi, double S, double t) {
    if (!(x > piston.x_min && x < piston.x_max))
        throw NegativeVolume("piston position outside admissible range");
    const double V = piston.area * x;
    const Vec N = moles_from_psi(net, psi, piston.N_ref);
    check_moles(N);

    const double T = net.temperature(S, N, V);
    const Vec mu = net.chemical_potentials(S, N, V);
    const Vec A = affinity(net, mu);
    const double p = net.pressure(S, N, V);
    const double F_ext = piston.F_ext ? piston.F_ext(t) : 0.0;

    ChemoMechDeriv d;
    d.dx = v;
    d.dv = (p * piston.area - piston.lambda * v + F_ext) / piston.mass;
    d.dpsi = net.rates(N, S) * A;
    d.prod_friction = piston.lambda * v * v / T;
    d.prod_chemical = d.dpsi.dot(A) / T;
    d.prod_external = piston.P_H / T;
    d.dS = d.prod_friction + d.prod_chemical + d.prod_external;
    return d;
}

void CompartmentModel::validate(int n_reactions) const {
    if (g1.size() != n_species || g2.size() != n_species)
        throw DimensionMismatch("conductance vectors must have length n_species");
    if ((g1.array() < 0.0).any() || (g2.array() < 0.0).any())
        throw NegativeConductivity("membrane conductances must be nonnegative");
    for (const Mat& L : rate_matrices) {
        if (L.size() == 0) continue;
        if (L.rows() != n_reactions || L.cols() != n_reactions)
            throw DimensionMismatch("compartment rate matrix shape mismatch");
        if (!is_symmetric(L) || !is_psd(L))
            throw InvariantViolation("compartment rate matrices must be symmetric PSD");
    }
}

Mat CompartmentModel::chemical_potentials(double S, const Mat& N) const {
    if (dU_dN) return dU_dN(S, N);
    // Finite differences over the flattened 3 x R mole table.
    Mat mu(3, n_species);
    Mat Np = N;
    for (int k = 0; k < 3; ++k)
        for (int I = 0; I < n_species; ++I) {
            const double h = fd::step(N(k, I));
            Np(k, I) = N(k, I) + h;
            const double up = internal_energy(S, Np);
            Np(k, I) = N(k, I) - h;
            const double um = internal_energy(S, Np);
            Np(k, I) = N(k, I);
            mu(k, I) = (up - um) / (2.0 * h);
        }
    return mu;
}

double CompartmentModel::temperature(double S, const Mat& N) const {
    const double T = dU_dS ? dU_dS(S, N)
                           : fd::partial([&](double s) { return internal_energy(s, N); }, S);
    if (!(T > 0.0)) throw NonPositiveTemperature();
    return T;
}

namespace {

void check_moles_table(const Mat& N) {
    for (Eigen::Index k = 0; k < N.rows(); ++k)
        for (Eigen::Index I = 0; I < N.cols(); ++I)
            if (!(N(k, I) >= -kMoleTol)) throw NegativeMoles();
}

}  // namespace

MembraneDeriv membrane_rhs(const CompartmentModel& model, const Mat& N, double S) {
    if (N.rows() != 3 || N.cols() != model.n_species)
        throw DimensionMismatch("membrane mole table must be 3 x n_species");
    check_moles_table(N);
    const double T = model.temperature(S, N);
    const Mat mu = model.chemical_potentials(S, N);

    MembraneDeriv d;
    d.dN = Mat::Zero(3, model.n_species);
    double neg_T_Sdot = 0.0;
    for (int I = 0; I < model.n_species; ++I) {
        const double d1 = mu(0, I) - mu(1, I);  // reservoir 1 -> membrane drop
        const double d2 = mu(1, I) - mu(2, I);  // membrane -> reservoir 2 drop
        const double J1 = -model.g1[I] * d1;
        const double J2 = -model.g2[I] * d2;
        d.dN(0, I) = J1;
        d.dN(1, I) = -J1 + J2;
        d.dN(2, I) = -J2;
        neg_T_Sdot += J1 * d1 + J2 * d2;
    }
    d.dS = -neg_T_Sdot / T + model.P_H / T;
    return d;
}

MembraneDeriv reacting_membrane_rhs(const CompartmentModel& model, const ReactionNetwork& net,
                                    const Mat& N, double S) {
    MembraneDeriv d = membrane_rhs(model, N, S);
    const double T = model.temperature(S, N);
    const Mat mu = model.chemical_potentials(S, N);

    double chem_power = 0.0;
    for (int k = 0; k < 3; ++k) {
        const Mat& L = model.rate_matrices[static_cast<std::size_t>(k)];
        if (L.size() == 0) continue;
        const Vec A_k = -(net.nu * mu.row(k).transpose());
        const Vec J_fr = L * A_k;
        d.dN.row(k) += (net.nu.transpose() * J_fr).transpose();
        chem_power += J_fr.dot(A_k);
    }
    d.dS += chem_power / T;
    return d;
}

}  // namespace varitherm
