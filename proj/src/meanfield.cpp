#include "comtrap/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "comtrap/errors.hpp"
#include "comtrap/log.hpp"
#include "fft_internal.hpp"

namespace comtrap::meanfield {

using grid::GridSpec;
using grid::GridWavefunction;

GridTrap GridTrap::isotropic(int dim, double a) {
    return matrix(a * Eigen::MatrixXd::Identity(dim, dim));
}

GridTrap GridTrap::matrix(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols() || (A.rows() != 1 && A.rows() != 2))
        throw ValidationError("grid trap matrix must be 1x1 or 2x2");
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * A.cwiseAbs().maxCoeff())
        throw ValidationError("grid trap matrix must be symmetric");
    GridTrap t;
    t.base_ = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.base_);
    if (!(es.eigenvalues().minCoeff() > 0))
        throw ValidationError("grid trap matrix must be positive definite");
    t.omega_max_ = std::sqrt(es.eigenvalues().maxCoeff());
    return t;
}

GridTrap GridTrap::modulated(const Eigen::MatrixXd& A0, std::function<double(double)> factor,
                             double factor_max) {
    GridTrap t = matrix(A0);
    if (!factor) throw ValidationError("modulated trap requires a factor function");
    t.factor_ = std::move(factor);
    t.omega_max_ *= std::sqrt(std::max(factor_max, 1.0));
    return t;
}

Eigen::MatrixXd GridTrap::at(double t) const {
    return factor_ ? Eigen::MatrixXd(factor_(t) * base_) : base_;
}

namespace {

// 1/2 r.A.r sampled on the grid.
std::vector<double> quad_form(const GridSpec& g, const Eigen::MatrixXd& A) {
    const int n = g.points;
    std::vector<double> v(g.size());
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) {
            const double x = g.coord(i);
            v[i] = 0.5 * A(0, 0) * x * x;
        }
    } else {
        for (int ix = 0; ix < n; ++ix) {
            const double x = g.coord(ix);
            for (int iy = 0; iy < n; ++iy) {
                const double y = g.coord(iy);
                v[static_cast<std::size_t>(ix) * n + iy] =
                    0.5 * (A(0, 0) * x * x + 2.0 * A(0, 1) * x * y + A(1, 1) * y * y);
            }
        }
    }
    return v;
}

// k^2 per grid node.
std::vector<double> ksq_table(const GridSpec& g) {
    const int n = g.points;
    const double dx = g.spacing();
    std::vector<double> k1(n);
    for (int j = 0; j < n; ++j) {
        const double k = detail::fft_wavenumber(j, n, dx);
        k1[j] = k * k;
    }
    if (g.dim == 1) return k1;
    std::vector<double> v(g.size());
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy)
            v[static_cast<std::size_t>(ix) * n + iy] = k1[ix] + k1[iy];
    return v;
}

void check_boundary(const GridWavefunction& w, double tol, int band, const char* what) {
    const double leak = w.boundary_fraction(band);
    if (leak > tol) {
        std::ostringstream msg;
        msg << what << ": boundary density " << leak << " of peak exceeds " << tol
            << " (band " << band << " cells) at t = " << w.t;
        throw NumericalError(msg.str());
    }
}

}  // namespace

std::vector<double> sample_potential(const GridSpec& g,
                                     const std::function<double(double, double)>& fn) {
    const int n = g.points;
    std::vector<double> v(g.size());
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) v[i] = fn(g.coord(i), 0.0);
    } else {
        for (int ix = 0; ix < n; ++ix)
            for (int iy = 0; iy < n; ++iy)
                v[static_cast<std::size_t>(ix) * n + iy] = fn(g.coord(ix), g.coord(iy));
    }
    return v;
}

GridWavefunction evolve(const GridWavefunction& psi0, const GridTrap& trap,
                        const NonlinearitySpec& nl, double t_end, double dt,
                        const EvolveOptions& opts) {
    const GridSpec& g = psi0.grid;
    g.validate();
    if (trap.dim() != g.dim) throw ValidationError("trap dimension does not match grid");
    if (!(dt > 0)) throw ValidationError("dt must be positive");
    if (!opts.extra_potential.empty() && opts.extra_potential.size() != g.size())
        throw ValidationError("extra_potential size does not match grid");

    const long nsteps = std::lround((t_end - psi0.t) / dt);
    if (nsteps < 0) throw ValidationError("t_end precedes the state time");
    if (nsteps == 0) return psi0;

    if (!opts.force_dt) {
        if (dt > 0.1 / trap.omega_max() * (1.0 + 1e-12)) {
            std::ostringstream msg;
            msg << "dt = " << dt << " exceeds 0.1/omega_max = " << 0.1 / trap.omega_max();
            throw ValidationError(msg.str());
        }
    }

    const std::vector<double> vquad = quad_form(g, trap.base());
    // Phase-wrap guard: per-step potential phase must stay small.
    const double f0 = trap.modulation(psi0.t);
    double vmax = 0;
    for (std::size_t i = 0; i < vquad.size(); ++i) {
        double v = f0 * vquad[i];
        if (!opts.extra_potential.empty()) v += opts.extra_potential[i];
        vmax = std::max(vmax, std::abs(v));
    }
    const double gmax = std::abs(nl.value(psi0.peak_density()));
    if (!opts.force_dt && dt * (vmax + gmax) > 0.5) {
        std::ostringstream msg;
        msg << "dt * max|potential + G| = " << dt * (vmax + gmax)
            << " exceeds the 0.5 phase-wrap guard";
        throw ValidationError(msg.str());
    }

    check_boundary(psi0, opts.boundary_tol, opts.boundary_band, "evolve");

    // Strang steps with fused kinetic half-steps:
    // K(dt/2) [ V(dt) K(dt) ]^{n-1} V(dt) K(dt/2).
    const std::vector<double> ksq = ksq_table(g);
    const std::size_t size = g.size();
    std::vector<std::complex<double>> khalf(size), kfull(size);
    for (std::size_t i = 0; i < size; ++i) {
        khalf[i] = std::exp(std::complex<double>(0.0, -0.25 * dt * ksq[i]));
        kfull[i] = khalf[i] * khalf[i];
    }

    GridWavefunction w = psi0;
    auto kinetic = [&](const std::vector<std::complex<double>>& factor) {
        detail::fft_forward(g.dim, g.points, w.psi);
        for (std::size_t i = 0; i < size; ++i) w.psi[i] *= factor[i];
        detail::fft_inverse(g.dim, g.points, w.psi);
    };

    kinetic(khalf);
    for (long step = 0; step < nsteps; ++step) {
        const double t_mid = psi0.t + step * dt + 0.5 * dt;
        const double factor = trap.modulation(t_mid);
        for (std::size_t i = 0; i < size; ++i) {
            double v = factor * vquad[i];
            if (!opts.extra_potential.empty()) v += opts.extra_potential[i];
            v += nl.value(std::norm(w.psi[i]));
            w.psi[i] *= std::exp(std::complex<double>(0.0, -dt * v));
        }
        kinetic(step + 1 == nsteps ? khalf : kfull);
        if ((step + 1) % opts.guard_stride == 0) {
            w.t = psi0.t + (step + 1) * dt;
            check_boundary(w, opts.boundary_tol, opts.boundary_band, "evolve");
        }
    }
    w.t = psi0.t + nsteps * dt;
    check_boundary(w, opts.boundary_tol, opts.boundary_band, "evolve");
    return w;
}

double stationarity_residual(const GridWavefunction& psi, const GridTrap& trap,
                             const NonlinearitySpec& nl, double* mu_out) {
    const GridSpec& g = psi.grid;
    const double dv = g.dim == 1 ? g.spacing() : g.spacing() * g.spacing();
    const std::size_t size = g.size();

    std::vector<std::complex<double>> hpsi = psi.psi;
    detail::fft_forward(g.dim, g.points, hpsi);
    const std::vector<double> ksq = ksq_table(g);
    for (std::size_t i = 0; i < size; ++i) hpsi[i] *= 0.5 * ksq[i];
    detail::fft_inverse(g.dim, g.points, hpsi);
    const std::vector<double> vquad = quad_form(g, trap.at(psi.t));
    for (std::size_t i = 0; i < size; ++i)
        hpsi[i] += (vquad[i] + nl.value(std::norm(psi.psi[i]))) * psi.psi[i];

    std::complex<double> overlap = 0;
    double nrm = 0;
    for (std::size_t i = 0; i < size; ++i) {
        overlap += std::conj(psi.psi[i]) * hpsi[i];
        nrm += std::norm(psi.psi[i]);
    }
    const double mu = overlap.real() / nrm;
    if (mu_out) *mu_out = mu;
    double r2 = 0;
    for (std::size_t i = 0; i < size; ++i) r2 += std::norm(hpsi[i] - mu * psi.psi[i]);
    return std::sqrt(r2 * dv);
}

GroundStateResult ground_state(const GridSpec& g, const GridTrap& trap,
                               const NonlinearitySpec& nl, double norm_target,
                               const GroundStateOptions& opts) {
    g.validate();
    if (trap.dim() != g.dim) throw ValidationError("trap dimension does not match grid");
    if (!(norm_target > 0)) throw ValidationError("norm_target must be positive");

    const std::size_t size = g.size();
    const std::vector<double> vquad = quad_form(g, trap.at(0.0));
    const std::vector<double> ksq = ksq_table(g);

    GridWavefunction w;
    w.grid = g;
    w.t = 0;
    w.psi.resize(size);
    const int n = g.points;
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) {
            const double x = g.coord(i);
            w.psi[i] = std::exp(-0.5 * x * x);
        }
    } else {
        for (int ix = 0; ix < n; ++ix)
            for (int iy = 0; iy < n; ++iy) {
                const double x = g.coord(ix);
                const double y = g.coord(iy);
                w.psi[static_cast<std::size_t>(ix) * n + iy] = std::exp(-0.5 * (x * x + y * y));
            }
    }
    {
        const double c = std::sqrt(norm_target / w.norm());
        for (auto& v : w.psi) v *= c;
    }

    GroundStateResult result;
    double dtau = opts.dtau;
    double mu_prev = 0;
    bool have_mu = false;
    long iter = 0;

    std::vector<double> khalf(size);
    auto fill_khalf = [&] {
        for (std::size_t i = 0; i < size; ++i) khalf[i] = std::exp(-0.25 * dtau * ksq[i]);
    };
    fill_khalf();

    double drift = std::numeric_limits<double>::infinity();
    double residual = std::numeric_limits<double>::infinity();
    bool refining = false;

    auto finish = [&](double mu_final) {
        result.psi = w;
        result.mu = mu_final;
        result.iterations = iter;
        result.residual = residual;
        log::debug("ground_state converged: mu=%.12g iters=%ld dtau=%g residual=%g",
                   mu_final, iter, dtau, residual);
        return result;
    };

    while (iter < opts.max_iterations) {
        ++iter;
        const double norm_before = w.norm();

        detail::fft_forward(g.dim, g.points, w.psi);
        for (std::size_t i = 0; i < size; ++i) w.psi[i] *= khalf[i];
        detail::fft_inverse(g.dim, g.points, w.psi);
        for (std::size_t i = 0; i < size; ++i)
            w.psi[i] *= std::exp(-dtau * (vquad[i] + nl.value(std::norm(w.psi[i]))));
        detail::fft_forward(g.dim, g.points, w.psi);
        for (std::size_t i = 0; i < size; ++i) w.psi[i] *= khalf[i];
        detail::fft_inverse(g.dim, g.points, w.psi);

        const double norm_after = w.norm();
        const double mu = -0.5 * std::log(norm_after / norm_before) / dtau;
        const double c = std::sqrt(norm_target / norm_after);
        for (auto& v : w.psi) v *= c;

        if (opts.record_energy)
            result.energy_history.push_back(gp_energy(w, trap, nl));

        if (have_mu) {
            drift = std::abs(mu - mu_prev);
            if (drift < opts.mu_drift_tol) {
                if (dtau * 0.5 < opts.dtau_min) {
                    double mu_rq = 0;
                    residual = stationarity_residual(w, trap, nl, &mu_rq);
                    if (opts.residual_tol <= 0 || residual <= opts.residual_tol)
                        return finish(mu_rq);
                    refining = true;  // drift test met; now drive the residual down
                    break;
                }
                dtau *= 0.5;
                fill_khalf();
                have_mu = false;  // first mu at new step size is not comparable
                continue;
            }
        }
        mu_prev = mu;
        have_mu = true;
    }
    if (!refining) {
        std::ostringstream msg;
        msg << "ground_state did not converge in " << opts.max_iterations
            << " iterations; chemical-potential drift " << drift;
        throw NumericalError(msg.str());
    }

    // The imaginary-time fixed point carries an O(dtau^2) bias. Polish it
    // with preconditioned steepest descent on the stationarity equation;
    // the inverse-kinetic preconditioner keeps the rate grid-independent.
    std::vector<std::complex<double>> hpsi(size), dir(size);
    double beta = 1.0;
    double mu_rq = 0;
    residual = stationarity_residual(w, trap, nl, &mu_rq);
    while (iter < opts.max_iterations) {
        ++iter;
        for (std::size_t i = 0; i < size; ++i) hpsi[i] = w.psi[i];
        detail::fft_forward(g.dim, g.points, hpsi);
        for (std::size_t i = 0; i < size; ++i) hpsi[i] *= 0.5 * ksq[i];
        detail::fft_inverse(g.dim, g.points, hpsi);
        for (std::size_t i = 0; i < size; ++i)
            hpsi[i] += (vquad[i] + nl.value(std::norm(w.psi[i]))) * w.psi[i] -
                       mu_rq * w.psi[i];

        dir = hpsi;
        detail::fft_forward(g.dim, g.points, dir);
        const double shift = std::max(mu_rq, 1.0);
        for (std::size_t i = 0; i < size; ++i) dir[i] /= (0.5 * ksq[i] + shift);
        detail::fft_inverse(g.dim, g.points, dir);

        GridWavefunction trial = w;
        for (std::size_t i = 0; i < size; ++i) trial.psi[i] = w.psi[i] - beta * dir[i];
        const double c = std::sqrt(norm_target / trial.norm());
        for (auto& v : trial.psi) v *= c;

        double mu_new = 0;
        const double res_new = stationarity_residual(trial, trap, nl, &mu_new);
        if (res_new < residual) {
            w = std::move(trial);
            residual = res_new;
            mu_rq = mu_new;
            beta = std::min(1.0, beta * 1.2);
            if (opts.record_energy) result.energy_history.push_back(gp_energy(w, trap, nl));
            if (residual <= opts.residual_tol) return finish(mu_rq);
        } else {
            beta *= 0.5;
            if (beta < 1e-6) break;  // stagnated at round-off level
        }
    }
    if (residual <= 4.0 * opts.residual_tol) {
        log::warn("ground_state residual stagnated at %g (target %g)", residual,
                  opts.residual_tol);
        return finish(mu_rq);
    }
    std::ostringstream msg;
    msg << "ground_state did not converge in " << opts.max_iterations
        << " iterations; stationarity residual " << residual;
    throw NumericalError(msg.str());
}

double gp_energy(const GridWavefunction& psi, const GridTrap& trap, const NonlinearitySpec& nl,
                 const std::vector<double>& extra_potential) {
    if (nl.custom)
        throw ValidationError("gp_energy supports the default quadratic nonlinearity only");
    const GridSpec& g = psi.grid;
    const double dv = g.dim == 1 ? g.spacing() : g.spacing() * g.spacing();
    const std::size_t size = g.size();

    std::vector<std::complex<double>> hat = psi.psi;
    detail::fft_forward(g.dim, g.points, hat);
    const std::vector<double> ksq = ksq_table(g);
    double kin = 0;
    for (std::size_t i = 0; i < size; ++i) kin += 0.5 * ksq[i] * std::norm(hat[i]);
    kin *= dv / static_cast<double>(size);

    const std::vector<double> vquad = quad_form(g, trap.at(psi.t));
    double pot = 0, inter = 0;
    for (std::size_t i = 0; i < size; ++i) {
        const double rho = std::norm(psi.psi[i]);
        double v = vquad[i];
        if (!extra_potential.empty()) v += extra_potential[i];
        pot += v * rho;
        inter += 0.5 * nl.g * rho * rho;
    }
    return kin + (pot + inter) * dv;
}

GridWavefunction displace(const GridWavefunction& psi, const classical::ClassicalState& state,
                          double f) {
    const GridSpec& g = psi.grid;
    const int n = g.points;
    const double dx = g.spacing();

    GridWavefunction out = psi;
    detail::fft_forward(g.dim, g.points, out.psi);
    if (g.dim == 1) {
        const double R = state.position(0);
        for (int j = 0; j < n; ++j) {
            const double k = detail::fft_wavenumber(j, n, dx);
            out.psi[j] *= std::exp(std::complex<double>(0.0, -k * R));
        }
    } else {
        const double Rx = state.position(0);
        const double Ry = state.position(1);
        for (int jx = 0; jx < n; ++jx) {
            const double kx = detail::fft_wavenumber(jx, n, dx);
            for (int jy = 0; jy < n; ++jy) {
                const double ky = detail::fft_wavenumber(jy, n, dx);
                out.psi[static_cast<std::size_t>(jx) * n + jy] *=
                    std::exp(std::complex<double>(0.0, -(kx * Rx + ky * Ry)));
            }
        }
    }
    detail::fft_inverse(g.dim, g.points, out.psi);

    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) {
            const double theta =
                classical::phase_field({g.coord(i), 0, 0}, state, f);
            out.psi[i] *= std::exp(std::complex<double>(0.0, theta));
        }
    } else {
        for (int ix = 0; ix < n; ++ix)
            for (int iy = 0; iy < n; ++iy) {
                const double theta =
                    classical::phase_field({g.coord(ix), g.coord(iy), 0}, state, f);
                out.psi[static_cast<std::size_t>(ix) * n + iy] *=
                    std::exp(std::complex<double>(0.0, theta));
            }
    }

    check_boundary(out, 1e-10, 10, "displace");
    return out;
}

Eigen::Vector3d com_expectation(const GridWavefunction& psi) {
    const GridSpec& g = psi.grid;
    const int n = g.points;
    double w = 0;
    Eigen::Vector3d m = Eigen::Vector3d::Zero();
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) {
            const double rho = std::norm(psi.psi[i]);
            w += rho;
            m(0) += rho * g.coord(i);
        }
    } else {
        for (int ix = 0; ix < n; ++ix)
            for (int iy = 0; iy < n; ++iy) {
                const double rho = std::norm(psi.psi[static_cast<std::size_t>(ix) * n + iy]);
                w += rho;
                m(0) += rho * g.coord(ix);
                m(1) += rho * g.coord(iy);
            }
    }
    if (w <= 0) throw ValidationError("com_expectation of a zero field");
    return m / w;
}

namespace {

// Trajectory lookup that tolerates times between samples by returning false.
bool traj_sample_index(const classical::Trajectory& traj, double t, std::size_t& idx) {
    const double t0 = traj.samples.front().time;
    const double x = (t - t0) / traj.dt;
    const long i = std::lround(x);
    if (i < 0 || i >= static_cast<long>(traj.samples.size())) return false;
    if (std::abs(x - i) > 1e-6) return false;
    idx = static_cast<std::size_t>(i);
    return true;
}

}  // namespace

FamilyReport verify_family(const GridWavefunction& psi0, const classical::Trajectory& traj,
                           const GridTrap& trap, const NonlinearitySpec& nl,
                           const std::vector<double>& t_checks,
                           const VerifyFamilyOptions& opts) {
    if (traj.frame != classical::Frame::Lab)
        throw ValidationError("verify_family requires a lab-frame trajectory");
    if (traj.samples.empty()) throw ValidationError("empty trajectory");
    if (std::abs(traj.samples.front().time - psi0.t) > 1e-12)
        throw ValidationError("trajectory must start at the state time");

    std::vector<double> checks = t_checks;
    std::sort(checks.begin(), checks.end());
    if (checks.empty()) throw ValidationError("no check times given");
    if (checks.front() <= psi0.t) throw ValidationError("check times must exceed the state time");

    FamilyReport report;
    report.l2_tol = opts.l2_tol;
    report.com_tol = opts.com_tol;

    // Path A: displace first, then evolve. Path B: evolve, displace at t.
    const classical::ClassicalState& s0 = traj.samples.front();
    GridWavefunction a = displace(psi0, s0, traj.action.front());
    GridWavefunction b_src = psi0;

    const double dt = opts.dt;
    double t_cursor = psi0.t;
    std::size_t next_check = 0;
    while (next_check < checks.size()) {
        // Advance both paths in com_stride chunks up to the next check time.
        const double target = psi0.t + std::lround((checks[next_check] - psi0.t) / dt) * dt;
        while (t_cursor < target - 0.5 * dt) {
            const double step_to =
                std::min(target, t_cursor + opts.com_stride * dt);
            a = evolve(a, trap, nl, step_to, dt, opts.evolve);
            b_src = evolve(b_src, trap, nl, step_to, dt, opts.evolve);
            t_cursor = a.t;

            std::size_t idx;
            if (traj_sample_index(traj, t_cursor, idx)) {
                const Eigen::Vector3d com = com_expectation(a);
                double dev = 0;
                for (int d = 0; d < psi0.grid.dim; ++d)
                    dev = std::hypot(dev, com(d) - traj.samples[idx].position(d));
                report.max_com_tracked = std::max(report.max_com_tracked, dev);
            }
        }

        std::size_t idx;
        if (!traj_sample_index(traj, t_cursor, idx))
            throw ValidationError("check time does not land on a trajectory sample");
        GridWavefunction b = displace(b_src, traj.samples[idx], traj.action[idx]);

        FamilyCheck c;
        c.t = t_cursor;
        c.l2_distance = grid::l2_distance(a, b);
        const Eigen::Vector3d com = com_expectation(a);
        for (int d = 0; d < psi0.grid.dim; ++d)
            c.com_mismatch = std::hypot(c.com_mismatch, com(d) - traj.samples[idx].position(d));
        report.checks.push_back(c);
        report.max_l2 = std::max(report.max_l2, c.l2_distance);
        report.max_com_tracked = std::max(report.max_com_tracked, c.com_mismatch);
        ++next_check;
    }

    report.passed = report.max_l2 <= report.l2_tol &&
                    report.max_com_tracked <= report.com_tol;
    return report;
}

}  // namespace comtrap::meanfield
