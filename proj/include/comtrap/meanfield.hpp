#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "comtrap/classical.hpp"
#include "comtrap/grid.hpp"

namespace comtrap::meanfield {

/// Nonlinear term G(|psi|) of the field equation. Default is the
/// Gross-Pitaevskii form g|psi|^2; `custom` overrides it with an arbitrary
/// real function of |psi|.
struct NonlinearitySpec {
    double g = 0;
    std::function<double(double)> custom;  // argument is |psi|

    double value(double density) const {
        return custom ? custom(std::sqrt(density)) : g * density;
    }
};

/// Harmonic trap restricted to the grid dimension, possibly time-dependent:
/// potential is (1/2) r . A(t) . r.
class GridTrap {
public:
    static GridTrap isotropic(int dim, double a);
    static GridTrap matrix(const Eigen::MatrixXd& A);
    /// A(t) = factor(t) * A0. factor_max bounds the modulation for the
    /// step-size guard.
    static GridTrap modulated(const Eigen::MatrixXd& A0, std::function<double(double)> factor,
                              double factor_max = 1.5);

    Eigen::MatrixXd at(double t) const;
    const Eigen::MatrixXd& base() const { return base_; }
    double modulation(double t) const { return factor_ ? factor_(t) : 1.0; }
    int dim() const { return static_cast<int>(base_.rows()); }
    double omega_max() const { return omega_max_; }
    bool time_dependent() const { return static_cast<bool>(factor_); }

private:
    GridTrap() = default;
    Eigen::MatrixXd base_;
    std::function<double(double)> factor_;
    double omega_max_ = 1.0;
};

struct EvolveOptions {
    bool force_dt = false;
    int guard_stride = 200;       // boundary-leak check cadence, in steps
    double boundary_tol = 1e-10;  // allowed boundary density / peak
    int boundary_band = 2;
    std::vector<double> extra_potential;  // optional static add-on, grid-sampled
};

/// Sample a static scalar potential on the grid (y is 0 for 1D grids).
std::vector<double> sample_potential(const grid::GridSpec& g,
                                     const std::function<double(double, double)>& fn);

/// Strang split-step evolution of
///   i d/dt psi = (-1/2 Laplacian + 1/2 r.A(t).r + extra + G(|psi|)) psi
/// from psi.t to t_end (snapped to whole steps).
grid::GridWavefunction evolve(const grid::GridWavefunction& psi, const GridTrap& trap,
                              const NonlinearitySpec& nl, double t_end, double dt,
                              const EvolveOptions& opts = {});

struct GroundStateOptions {
    double dtau = 2e-3;
    double dtau_min = 2.4e-4;    // refinement floor (dtau is halved on convergence)
    double mu_drift_tol = 1e-10; // per-step chemical-potential drift
    /// After the drift criterion is met, keep iterating until the
    /// stationarity residual ||H psi - mu psi|| drops below this (the drift
    /// test alone is quadratically insensitive to the state error). 0 = off.
    double residual_tol = 5e-8;
    long max_iterations = 400000;
    bool record_energy = false;
};

struct GroundStateResult {
    grid::GridWavefunction psi;
    double mu = 0;
    long iterations = 0;
    double residual = 0;  // ||H psi - mu psi|| at return
    std::vector<double> energy_history;  // filled when record_energy
};

/// L2 norm of (H - mu) psi with mu the Rayleigh quotient; H applied with
/// the spectral kinetic operator. Default quadratic nonlinearity only.
double stationarity_residual(const grid::GridWavefunction& psi, const GridTrap& trap,
                             const NonlinearitySpec& nl, double* mu_out = nullptr);

/// Imaginary-time propagation with per-step renormalization to norm_target.
GroundStateResult ground_state(const grid::GridSpec& g, const GridTrap& trap,
                               const NonlinearitySpec& nl, double norm_target,
                               const GroundStateOptions& opts = {});

/// Gross-Pitaevskii energy functional (default quadratic nonlinearity only):
/// kinetic (spectral) + trap at time t + extra + g/2 |psi|^4.
double gp_energy(const grid::GridWavefunction& psi, const GridTrap& trap,
                 const NonlinearitySpec& nl,
                 const std::vector<double>& extra_potential = {});

/// Displacement transform psi'(r) = psi(r - R) exp(i (r.V - f)); the shift
/// is a momentum-space phase ramp (exact for band-limited fields).
grid::GridWavefunction displace(const grid::GridWavefunction& psi,
                                const classical::ClassicalState& state, double f);

/// <r>, zero-padded to three components.
Eigen::Vector3d com_expectation(const grid::GridWavefunction& psi);

struct FamilyCheck {
    double t = 0;
    double l2_distance = 0;    // | evolve(displace psi0) - displace(evolve psi0) |
    double com_mismatch = 0;   // | <r> - R(t) | at this check time
};

struct FamilyReport {
    std::vector<FamilyCheck> checks;
    double max_l2 = 0;
    double max_com_tracked = 0;  // COM vs classical R over the whole evolution
    double l2_tol = 0;
    double com_tol = 0;
    bool passed = false;
};

struct VerifyFamilyOptions {
    double dt = 1e-3;
    double l2_tol = 1e-5;
    double com_tol = 1e-5;
    int com_stride = 50;  // COM tracking cadence, in steps
    EvolveOptions evolve;
};

/// Checks the solution-family transform along a lab-frame trajectory:
/// evolving the displaced state must equal displacing the evolved state.
/// The trajectory must solve the classical equation for the same trap.
FamilyReport verify_family(const grid::GridWavefunction& psi0,
                           const classical::Trajectory& traj, const GridTrap& trap,
                           const NonlinearitySpec& nl, const std::vector<double>& t_checks,
                           const VerifyFamilyOptions& opts = {});

}  // namespace comtrap::meanfield
