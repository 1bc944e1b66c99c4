#pragma once

#include <functional>
#include <optional>

#include "varitherm/fd.hpp"
#include "varitherm/linalg.hpp"

namespace varitherm {

enum class Boundary { periodic, walls };

/// Uniform cell-centered 1-D grid. Walls are no-slip, adiabatic, impermeable.
struct Grid1D {
    int n_cells = 4;
    double dx = 1.0;
    Boundary boundary = Boundary::periodic;

    double length() const { return n_cells * dx; }
    double x_center(int i) const { return (i + 0.5) * dx; }
    void validate() const {
        if (n_cells < 4) throw InvariantViolation("grid needs at least 4 cells");
        if (!(dx > 0.0)) throw InvariantViolation("grid spacing must be positive");
    }
};

/// Cell fields: mole densities (n_cells x K), momentum density m = rho v,
/// entropy density s.
struct ContinuumState {
    Mat n;
    Vec m, s;
    double t = 0.0;

    int cells() const { return static_cast<int>(n.rows()); }
    int species() const { return static_cast<int>(n.cols()); }
};

/// Equation of state: volumetric internal energy eps({n_A}, s) with partials
/// T = de/ds and mu^A = de/dn_A (finite-difference fallback). Pressure is the
/// Gibbs-Euler combination p = sum_A n_A mu^A + s T - eps.
struct EOS {
    int n_species = 1;
    Vec molar_mass;  // length n_species, positive
    std::function<double(const Vec& n, double s)> energy;
    std::function<double(const Vec& n, double s)> dE_ds;
    std::function<Vec(const Vec& n, double s)> dE_dn;

    double temperature(const Vec& n, double s) const;  // throws if <= 0
    Vec chemical_potentials(const Vec& n, double s) const;
    double pressure(const Vec& n, double s) const;
    /// Adiabatic sound speed by differencing p along the self-similar ray
    /// (n, s) -> ((1+h)n, (1+h)s), which holds composition and entropy per
    /// mole fixed.
    double sound_speed(const Vec& n, double s) const;
};

/// Transport coefficients. The scalar coefficients act additively to the
/// optional Onsager blocks, so a single-component run may use (mu, zeta,
/// kappa) only, while a multicomponent run supplies the coupled matrices.
struct Phenomenology {
    double mu_shear = 0.0;
    double zeta_bulk = 0.0;
    double kappa_fourier = 0.0;
    /// (K+1)x(K+1) block for -(j_S, j_A) = L (dT/dx, dmu^B/dx); empty = absent.
    Mat onsager_vector;
    /// (r+1)x(r+1) block for (Tr sigma_fr, j_a) = L (div v / 3, A^b); empty = absent.
    Mat onsager_scalar;

    /// Symmetry, positive semidefiniteness and the mass-consistency rows
    /// M^A L_AS = M^A L_AB = 0 (which keep M^A j_A = 0 exactly).
    void validate(const Vec& molar_mass, int n_species, int n_reactions) const;
};

/// Face-centered dissipative fluxes plus per-cell entropy production. Faces
/// are indexed 0..n_cells; face f separates cells f-1 and f.
struct FaceFluxes {
    Vec sigma_fr;        // viscous stress at faces
    Vec j_S;             // entropy flux at faces
    Mat j_A;             // diffusive species fluxes at faces ((n_cells+1) x K)
    Vec production;      // T * i per cell (nonnegative quadratic forms)
    Vec temperature;     // per cell
    double max_wave_speed = 0.0;
};

struct ContinuumDeriv {
    Mat dn;
    Vec dm, ds;
    double max_wave_speed = 0.0;
};

/// Dissipative fluxes of the single-component viscous heat-conducting fluid:
/// sigma_fr = (4 mu/3 + zeta) dv/dx and T j_S = -kappa dT/dx, both at faces.
FaceFluxes fluxes_nsf(const ContinuumState& state, const EOS& eos, const Phenomenology& phen,
                      const Grid1D& grid);

/// Single-component compressible heat-conducting flow:
///   rho (dv/dt + v dv/dx) = -dp/dx + d(sigma_fr)/dx
///   d(rho)/dt + d(rho v)/dx = 0
///   T (ds/dt + d(s v)/dx + d(j_S)/dx) = sigma_fr dv/dx - j_S dT/dx + rho r
/// discretized in conservative form with reconstructed local Lax-Friedrichs
/// advective fluxes and central-difference dissipative fluxes.
ContinuumDeriv nsf_rhs(const ContinuumState& state, const EOS& eos, const Phenomenology& phen,
                       const Grid1D& grid,
                       const std::function<double(double x)>& heat_source = {});

/// Multicomponent reacting viscous fluid:
///   dn_A/dt + d(n_A v)/dx + d(j_A)/dx = j_a nu^a_A
///   T (ds/dt + ...) = sigma dv/dx - j_S dT/dx - j_A dmu^A/dx + j_a A^a + rho r
/// with fluxes from the Onsager blocks. nu is n_reactions x K and must satisfy
/// M^A nu^a_A = 0.
ContinuumDeriv multicomponent_rhs(const ContinuumState& state, const EOS& eos,
                                  const Phenomenology& phen, const Mat& nu, const Grid1D& grid,
                                  const std::function<double(double x)>& heat_source = {});

/// Dissipative fluxes and production of the multicomponent system.
FaceFluxes fluxes_multicomponent(const ContinuumState& state, const EOS& eos,
                                 const Phenomenology& phen, const Mat& nu, const Grid1D& grid);

/// Pointwise internal entropy production density i = production / T.
/// Nonnegative up to rounding when the phenomenology is PSD.
Vec clausius_duhem_field(const ContinuumState& state, const FaceFluxes& fluxes);

struct Totals {
    double energy = 0.0;   // integral of 1/2 rho v^2 + eps
    double entropy = 0.0;  // integral of s
    double mass = 0.0;     // integral of sum_A M^A n_A
    Vec moles;             // per-species integrals
};

/// Midpoint-rule totals (cell sums times dx).
Totals totals(const ContinuumState& state, const EOS& eos, const Grid1D& grid);

/// CFL advisory time step 0.4 dx / max(|v| + c).
double cfl_advisory(const ContinuumState& state, const EOS& eos, const Grid1D& grid);

/// Stable explicit step estimate: the advective advisory capped by the
/// diffusive limit 0.4 dx^2 / nu for the combined momentum / heat / species
/// diffusivities of the phenomenology.
double stable_dt_estimate(const ContinuumState& state, const EOS& eos,
                          const Phenomenology& phen, const Grid1D& grid);

}  // namespace varitherm
