#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "comtrap/classical.hpp"
#include "comtrap/grid.hpp"

namespace comtrap::fewbody {

/// Two-particle interaction, a function of x1 - x2 only.
struct Interaction {
    enum class Kind { Harmonic, Gaussian };
    Kind kind = Kind::Harmonic;
    double kappa = 0;  // harmonic: kappa (x1-x2)^2 / 2
    double g = 0;      // gaussian: g exp(-(x1-x2)^2 / (2 s^2))
    double s = 1;

    static Interaction harmonic(double kappa);
    static Interaction gaussian(double g, double s);

    double value(double xi) const;
    double range() const;  // characteristic length the grid must resolve
};

/// Two particles on a 1D line in a trap of frequency-squared `a`,
/// discretized on a 2D (x1, x2) grid.
struct FewBodyProblem {
    double a = 1.0;
    Interaction interaction;
    grid::GridSpec grid;  // dim must be 2

    void validate() const;
};

struct FewBodySpectrum {
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXd eigenvectors;  // columns, orthonormal, grid-flattened
    std::vector<int> exchange_parity;  // +1 symmetric (Bose), -1 antisymmetric (Fermi)
    grid::GridSpec grid;
    double max_residual = 0;  // max ||Hv - Ev|| over returned pairs
};

struct LadderAssignment {
    int state = 0;
    int ladder = 0;  // internal-motion index j
    int rung = 0;    // center-of-mass quantum k
    double residual = 0;
};

struct LadderFit {
    std::vector<LadderAssignment> assignments;
    std::vector<double> base_energies;  // fitted ladder bases E_I(j) + spacing/2
    double spacing_used = 0;            // sqrt(a), used for the assignment
    double spacing_fitted = 0;          // least-squares re-estimate from the data
    double max_residual = 0;            // vs the fitted ladder model
    double residual_bound = 0;
    bool residual_ok = false;
};

/// H = -1/2 (d1^2 + d2^2) + a/2 (x1^2 + x2^2) + V(x1 - x2), second-order
/// central differences, Dirichlet boundaries. Throws when the grid cannot
/// resolve the oscillator length or the interaction range with >= 8 points.
Eigen::SparseMatrix<double> build_hamiltonian(const FewBodyProblem& p);

/// Lowest k eigenpairs by shift-and-invert subspace iteration; residuals
/// ||Hv - Ev|| <= 1e-8. Degenerate clusters are rotated to definite
/// exchange parity.
FewBodySpectrum diagonalize(const Eigen::SparseMatrix<double>& H, const FewBodyProblem& p,
                            int k_lowest);

/// Greedy decomposition E ~ base_j + sqrt(a) k with one state per (j, k)
/// slot, followed by a least-squares refit of bases and spacing.
LadderFit ladder_decompose(const Eigen::VectorXd& eigenvalues, double a,
                           double residual_bound = 1e-3);

/// Psi'(x1,x2) = exp(i theta(x1) + i theta(x2)) Psi(x1 - R, x2 - R) with
/// theta(x) = x V - f; spectral shift along both axes.
grid::GridWavefunction transform_two_body(const grid::GridWavefunction& Psi,
                                          const classical::ClassicalState& state, double f);

/// Marginal density of the relative coordinate xi = x1 - x2, sampled at
/// xi_m = m dx for m in [-(N-1), N-1]. Integrates (sum * dx) to the norm.
std::vector<double> relative_marginal(const grid::GridWavefunction& Psi);

/// <rho> = (<x1> + <x2>)/2 of a two-body grid state.
double com_coordinate(const grid::GridWavefunction& Psi);

/// Split-step evolution under the two-particle Hamiltonian (interaction as
/// a static extra potential on the 2D grid).
grid::GridWavefunction evolve_two_body(const grid::GridWavefunction& Psi,
                                       const FewBodyProblem& p, double t_end, double dt);

/// Grid eigenvector as a wavefunction snapshot (t = 0, unit norm).
grid::GridWavefunction state_from_vector(const FewBodyProblem& p, const Eigen::VectorXd& v);

}  // namespace comtrap::fewbody
