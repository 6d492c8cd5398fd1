#include "comtrap/fewbody.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include <Eigen/SparseCholesky>

#include "comtrap/errors.hpp"
#include "comtrap/log.hpp"
#include "comtrap/meanfield.hpp"
#include "fft_internal.hpp"

namespace comtrap::fewbody {

using grid::GridSpec;
using grid::GridWavefunction;

Interaction Interaction::harmonic(double kappa) {
    Interaction i;
    i.kind = Kind::Harmonic;
    i.kappa = kappa;
    return i;
}

Interaction Interaction::gaussian(double g, double s) {
    if (!(s > 0)) throw ValidationError("gaussian interaction width must be positive");
    Interaction i;
    i.kind = Kind::Gaussian;
    i.g = g;
    i.s = s;
    return i;
}

double Interaction::value(double xi) const {
    switch (kind) {
        case Kind::Harmonic: return 0.5 * kappa * xi * xi;
        case Kind::Gaussian: return g * std::exp(-xi * xi / (2.0 * s * s));
    }
    return 0;
}

double Interaction::range() const {
    switch (kind) {
        case Kind::Harmonic:
            // Relative-motion oscillator length; kappa = 0 falls back to the
            // bare trap, handled by the caller's a-based bound.
            return kappa > 0 ? std::pow(1.0 / (1.0 + 2.0 * kappa), 0.25)
                             : std::numeric_limits<double>::infinity();
        case Kind::Gaussian: return s;
    }
    return 0;
}

void FewBodyProblem::validate() const {
    grid.validate();
    if (grid.dim != 2) throw ValidationError("few-body grid must be 2D over (x1, x2)");
    if (!(a > 0)) throw ValidationError("trap frequency-squared a must be positive");

    const double dx = grid.spacing();
    const double com_len = std::pow(a, -0.25);
    double needed = com_len;
    if (interaction.kind == Interaction::Kind::Harmonic && interaction.kappa > 0)
        needed = std::min(needed, std::pow(a + 2.0 * interaction.kappa, -0.25));
    if (interaction.kind == Interaction::Kind::Gaussian)
        needed = std::min(needed, interaction.s);
    if (8.0 * dx > needed) {
        const int required = static_cast<int>(std::ceil(16.0 * grid.extent / needed));
        std::ostringstream msg;
        msg << "grid too coarse: dx = " << dx << " must resolve length " << needed
            << " with >= 8 points; need N >= " << required;
        throw ValidationError(msg.str());
    }
}

Eigen::SparseMatrix<double> build_hamiltonian(const FewBodyProblem& p) {
    p.validate();
    const int n = p.grid.points;
    const double dx = p.grid.spacing();
    const double inv2 = 1.0 / (dx * dx);
    const long size = static_cast<long>(n) * n;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(size) * 5);
    auto id = [n](int i, int j) { return static_cast<long>(i) * n + j; };

    for (int i = 0; i < n; ++i) {
        const double x1 = p.grid.coord(i);
        for (int j = 0; j < n; ++j) {
            const double x2 = p.grid.coord(j);
            const double diag =
                2.0 * inv2 + 0.5 * p.a * (x1 * x1 + x2 * x2) + p.interaction.value(x1 - x2);
            trip.emplace_back(id(i, j), id(i, j), diag);
            if (i + 1 < n) {
                trip.emplace_back(id(i, j), id(i + 1, j), -0.5 * inv2);
                trip.emplace_back(id(i + 1, j), id(i, j), -0.5 * inv2);
            }
            if (j + 1 < n) {
                trip.emplace_back(id(i, j), id(i, j + 1), -0.5 * inv2);
                trip.emplace_back(id(i, j + 1), id(i, j), -0.5 * inv2);
            }
        }
    }
    Eigen::SparseMatrix<double> H(size, size);
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
}

namespace {

// Swap (x1, x2) -> (x2, x1): transpose of the grid indices.
Eigen::VectorXd exchange(const Eigen::VectorXd& v, int n) {
    Eigen::VectorXd out(v.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out(static_cast<long>(i) * n + j) = v(static_cast<long>(j) * n + i);
    return out;
}

}  // namespace

FewBodySpectrum diagonalize(const Eigen::SparseMatrix<double>& H, const FewBodyProblem& p,
                            int k_lowest) {
    const long size = H.rows();
    if (k_lowest < 1 || k_lowest > size / 4)
        throw ValidationError("k_lowest must be small compared to the grid size");

    // Spectrum lower bound: the stencil kinetic part is positive
    // semidefinite, so the potential minimum bounds the spectrum from below.
    double vmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < p.grid.points; ++i) {
        const double x1 = p.grid.coord(i);
        for (int j = 0; j < p.grid.points; ++j) {
            const double x2 = p.grid.coord(j);
            vmin = std::min(vmin, 0.5 * p.a * (x1 * x1 + x2 * x2) +
                                      p.interaction.value(x1 - x2));
        }
    }
    const double sigma = vmin - 1.0;

    Eigen::SparseMatrix<double> shifted = H;
    for (long i = 0; i < size; ++i) shifted.coeffRef(i, i) -= sigma;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
    if (solver.info() != Eigen::Success)
        throw NumericalError("few-body factorization failed (shifted Hamiltonian)");

    const int subdim = std::min<long>(k_lowest + 12, size);
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(size, subdim);
    // Deterministic pseudo-random start vectors.
    std::uint64_t rng = 0x9e3779b97f4a7c15ull;
    for (long i = 0; i < size; ++i)
        for (int j = 0; j < subdim; ++j) {
            rng = rng * 6364136223846793005ull + 1442695040888963407ull;
            X(i, j) = static_cast<double>(rng >> 11) / 9007199254740992.0 - 0.5;
        }

    const double tol = 1e-8;
    const int max_rounds = 200;
    Eigen::VectorXd evals = Eigen::VectorXd::Zero(k_lowest);
    Eigen::MatrixXd evecs(size, k_lowest);
    double worst = std::numeric_limits<double>::infinity();

    // Triangular solves dominate; split the right-hand-side block over two
    // threads (the factorization is read-only during solves).
    auto solve_block = [&solver](const Eigen::MatrixXd& B) {
        Eigen::MatrixXd out(B.rows(), B.cols());
        if (B.cols() >= 4 && std::thread::hardware_concurrency() >= 2) {
            const long half = B.cols() / 2;
            std::thread left([&] { out.leftCols(half) = solver.solve(B.leftCols(half)); });
            out.rightCols(B.cols() - half) = solver.solve(B.rightCols(B.cols() - half));
            left.join();
        } else {
            out = solver.solve(B);
        }
        return out;
    };

    // Tall-skinny orthonormalization: Cholesky-QR, applied twice.
    auto cholqr = [](Eigen::MatrixXd& M) {
        for (int pass = 0; pass < 2; ++pass) {
            Eigen::MatrixXd gram = M.transpose() * M;
            Eigen::LLT<Eigen::MatrixXd> llt(gram);
            if (llt.info() != Eigen::Success) {
                Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
                M = qr.householderQ() * Eigen::MatrixXd::Identity(M.rows(), M.cols());
                continue;
            }
            M = llt.matrixU().solve<Eigen::OnTheRight>(M);
        }
    };

    // Subspace iteration with prefix locking: converged leading pairs drop
    // out of the solve block, the active tail keeps iterating.
    int locked = 0;
    bool done = false;
    for (int round = 0; round < max_rounds; ++round) {
        const int active = subdim - locked;
        Eigen::MatrixXd act = solve_block(X.rightCols(active));
        act = solve_block(act);

        // Orthogonalize against the locked prefix, then within the block.
        for (int pass = 0; pass < 2; ++pass) {
            if (locked > 0)
                act.noalias() -= X.leftCols(locked) * (X.leftCols(locked).transpose() * act);
            cholqr(act);
        }

        Eigen::MatrixXd Hact = H * act;
        const Eigen::MatrixXd small = act.transpose() * Hact;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(small);
        act = act * es.eigenvectors();  // ascending Ritz values
        Hact = Hact * es.eigenvectors();
        X.rightCols(active) = act;

        // Lock converged leading pairs in order.
        int newly = 0;
        worst = 0;
        while (locked + newly < k_lowest) {
            const double lambda = es.eigenvalues()(newly);
            const double r = (Hact.col(newly) - lambda * act.col(newly)).norm();
            if (newly == 0) worst = r;
            if (r > tol) break;
            evals(locked + newly) = lambda;
            ++newly;
        }
        locked += newly;
        log::debug("fewbody subspace round %d: locked %d, next residual %.3e", round,
                   locked, worst);
        if (locked >= k_lowest) {
            done = true;
            break;
        }
    }
    if (!done) {
        std::ostringstream msg;
        msg << "few-body eigensolver did not converge: " << locked << "/" << k_lowest
            << " pairs at tol " << tol << " after " << max_rounds
            << " rounds (next residual " << worst << ")";
        throw NumericalError(msg.str());
    }
    evecs = X.leftCols(k_lowest);
    {
        // Locking may misorder near-degenerate neighbours at tol level.
        std::vector<int> order(k_lowest);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return evals(a) < evals(b); });
        Eigen::VectorXd ev = evals;
        Eigen::MatrixXd vv = evecs;
        for (int j = 0; j < k_lowest; ++j) {
            evals(j) = ev(order[j]);
            evecs.col(j) = vv.col(order[j]);
        }
        // Final residual audit on the returned pairs.
        const Eigen::MatrixXd Hk = H * evecs;
        worst = 0;
        for (int j = 0; j < k_lowest; ++j)
            worst = std::max(worst, (Hk.col(j) - evals(j) * evecs.col(j)).norm());
    }

    FewBodySpectrum spec;
    spec.grid = p.grid;
    spec.eigenvalues = evals;
    spec.eigenvectors = evecs;
    spec.max_residual = worst;

    // Rotate near-degenerate clusters to definite exchange parity.
    const int n = p.grid.points;
    const double cluster_tol = 1e-7 * std::max(1.0, std::abs(evals(k_lowest - 1)));
    int lo = 0;
    while (lo < k_lowest) {
        int hi = lo + 1;
        while (hi < k_lowest && evals(hi) - evals(hi - 1) <= cluster_tol) ++hi;
        const int m = hi - lo;
        if (m > 1) {
            Eigen::MatrixXd S(m, m);
            for (int acol = 0; acol < m; ++acol) {
                const Eigen::VectorXd sw = exchange(spec.eigenvectors.col(lo + acol), n);
                for (int brow = 0; brow < m; ++brow)
                    S(brow, acol) = spec.eigenvectors.col(lo + brow).dot(sw);
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
            spec.eigenvectors.middleCols(lo, m) =
                spec.eigenvectors.middleCols(lo, m) * es.eigenvectors();
        }
        lo = hi;
    }
    spec.exchange_parity.resize(k_lowest);
    for (int j = 0; j < k_lowest; ++j) {
        const double par =
            spec.eigenvectors.col(j).dot(exchange(spec.eigenvectors.col(j), n));
        spec.exchange_parity[j] = par >= 0 ? 1 : -1;
        if (std::abs(std::abs(par) - 1.0) > 1e-6)
            log::warn("few-body state %d has mixed exchange parity <S> = %.6f", j, par);
    }
    return spec;
}

LadderFit ladder_decompose(const Eigen::VectorXd& eigenvalues, double a,
                           double residual_bound) {
    if (eigenvalues.size() < 10)
        throw ValidationError("ladder_decompose needs at least 10 eigenvalues");
    for (int i = 1; i < eigenvalues.size(); ++i)
        if (eigenvalues(i) < eigenvalues(i - 1))
            throw ValidationError("eigenvalues must be ascending");
    if (!(a > 0)) throw ValidationError("a must be positive");

    const double spacing = std::sqrt(a);
    const int nstates = static_cast<int>(eigenvalues.size());

    LadderFit fit;
    fit.spacing_used = spacing;
    fit.residual_bound = residual_bound;

    // Greedy assignment, one state per (ladder, rung) slot.
    struct Ladder {
        double base;
        std::vector<int> used;
    };
    // A state joins an existing ladder only when it sits within a few grid
    // errors of a free rung; anything further off starts a new internal
    // level. A spacing-scale tolerance would swallow internal states whose
    // energy happens to fall near a rung.
    std::vector<Ladder> ladders;
    const double assign_tol = std::min(5.0 * residual_bound, 0.25 * spacing);
    for (int i = 0; i < nstates; ++i) {
        const double E = eigenvalues(i);
        int best_j = -1, best_k = 0;
        double best_r = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < ladders.size(); ++j) {
            const int k = static_cast<int>(std::lround((E - ladders[j].base) / spacing));
            if (k < 1) continue;
            if (std::find(ladders[j].used.begin(), ladders[j].used.end(), k) !=
                ladders[j].used.end())
                continue;
            const double r = std::abs(E - ladders[j].base - spacing * k);
            if (r < best_r) {
                best_r = r;
                best_j = static_cast<int>(j);
                best_k = k;
            }
        }
        if (best_j < 0 || best_r > assign_tol) {
            ladders.push_back({E, {0}});
            fit.assignments.push_back({i, static_cast<int>(ladders.size()) - 1, 0, 0.0});
        } else {
            ladders[static_cast<std::size_t>(best_j)].used.push_back(best_k);
            fit.assignments.push_back({i, best_j, best_k, best_r});
        }
    }

    // Least-squares refit of bases and spacing over the fixed assignment:
    // E_i = base_{j_i} + spacing * k_i.
    const int nl = static_cast<int>(ladders.size());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nstates, nl + 1);
    Eigen::VectorXd rhs(nstates);
    bool any_rung = false;
    for (int i = 0; i < nstates; ++i) {
        M(i, fit.assignments[i].ladder) = 1.0;
        M(i, nl) = fit.assignments[i].rung;
        if (fit.assignments[i].rung > 0) any_rung = true;
        rhs(i) = eigenvalues(i);
    }
    Eigen::VectorXd sol;
    if (any_rung) {
        sol = M.colPivHouseholderQr().solve(rhs);
    } else {
        // No rungs assigned (every state its own ladder): spacing cannot be
        // estimated from the data; keep the theoretical value.
        sol = Eigen::VectorXd::Zero(nl + 1);
        for (int i = 0; i < nstates; ++i) sol(fit.assignments[i].ladder) = eigenvalues(i);
        sol(nl) = spacing;
    }
    fit.spacing_fitted = sol(nl);
    fit.base_energies.assign(sol.data(), sol.data() + nl);
    fit.max_residual = 0;
    for (int i = 0; i < nstates; ++i) {
        const double model = sol(fit.assignments[i].ladder) + sol(nl) * fit.assignments[i].rung;
        fit.assignments[i].residual = std::abs(eigenvalues(i) - model);
        fit.max_residual = std::max(fit.max_residual, fit.assignments[i].residual);
    }
    fit.residual_ok = fit.max_residual <= residual_bound;
    if (!fit.residual_ok)
        log::warn("ladder fit residual %.3e exceeds bound %.3e", fit.max_residual,
                  residual_bound);
    return fit;
}

GridWavefunction transform_two_body(const GridWavefunction& Psi,
                                    const classical::ClassicalState& state, double f) {
    if (Psi.grid.dim != 2) throw ValidationError("transform_two_body needs a 2D grid");
    const int n = Psi.grid.points;
    const double dx = Psi.grid.spacing();
    const double R = state.position(0);

    GridWavefunction out = Psi;
    detail::fft_forward(2, n, out.psi);
    for (int jx = 0; jx < n; ++jx) {
        const double kx = detail::fft_wavenumber(jx, n, dx);
        for (int jy = 0; jy < n; ++jy) {
            const double ky = detail::fft_wavenumber(jy, n, dx);
            out.psi[static_cast<std::size_t>(jx) * n + jy] *=
                std::exp(std::complex<double>(0.0, -(kx + ky) * R));
        }
    }
    detail::fft_inverse(2, n, out.psi);

    // Each particle coordinate picks up the same one-particle phase.
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy) {
            const double theta =
                classical::phase_field({Psi.grid.coord(ix), 0, 0}, state, f) +
                classical::phase_field({Psi.grid.coord(iy), 0, 0}, state, f);
            out.psi[static_cast<std::size_t>(ix) * n + iy] *=
                std::exp(std::complex<double>(0.0, theta));
        }

    const double leak = out.boundary_fraction(10);
    if (leak > 1e-10) {
        std::ostringstream msg;
        msg << "transform_two_body: shift moved density within 10 cells of the boundary "
               "(fraction "
            << leak << " of peak)";
        throw NumericalError(msg.str());
    }
    return out;
}

std::vector<double> relative_marginal(const GridWavefunction& Psi) {
    if (Psi.grid.dim != 2) throw ValidationError("relative_marginal needs a 2D grid");
    const int n = Psi.grid.points;
    const double dx = Psi.grid.spacing();
    std::vector<double> marg(2 * n - 1, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int m = i - j;  // xi = m dx
            marg[static_cast<std::size_t>(m + n - 1)] +=
                std::norm(Psi.psi[static_cast<std::size_t>(i) * n + j]) * dx;
        }
    return marg;
}

double com_coordinate(const GridWavefunction& Psi) {
    const Eigen::Vector3d com = meanfield::com_expectation(Psi);
    return 0.5 * (com(0) + com(1));
}

GridWavefunction evolve_two_body(const GridWavefunction& Psi, const FewBodyProblem& p,
                                 double t_end, double dt) {
    meanfield::EvolveOptions opts;
    opts.extra_potential = meanfield::sample_potential(
        p.grid, [&p](double x1, double x2) { return p.interaction.value(x1 - x2); });
    meanfield::NonlinearitySpec none;
    return meanfield::evolve(Psi, meanfield::GridTrap::isotropic(2, p.a), none, t_end, dt,
                             opts);
}

GridWavefunction state_from_vector(const FewBodyProblem& p, const Eigen::VectorXd& v) {
    if (v.size() != static_cast<long>(p.grid.size()))
        throw ValidationError("vector size does not match grid");
    GridWavefunction w;
    w.grid = p.grid;
    w.t = 0;
    w.psi.resize(p.grid.size());
    for (long i = 0; i < v.size(); ++i) w.psi[static_cast<std::size_t>(i)] = v(i);
    const double nrm = w.norm();
    if (!(nrm > 0)) throw ValidationError("zero vector");
    const double c = 1.0 / std::sqrt(nrm);
    for (auto& z : w.psi) z *= c;
    return w;
}

}  // namespace comtrap::fewbody
