#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "comtrap/config.hpp"
#include "comtrap/errors.hpp"
#include "comtrap/log.hpp"
#include "comtrap/meanfield.hpp"
#include "comtrap/spectral.hpp"

namespace comtrap::cli {

using nlohmann::json;

namespace {

// 17 significant digits: doubles round-trip exactly.
std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    unsigned t = threads > 0 ? static_cast<unsigned>(threads)
                             : std::max(1u, std::thread::hardware_concurrency());
    t = std::min<unsigned>(t, std::max<std::size_t>(n, 1));
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (unsigned w = 0; w < t; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += t) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open output file: " + path);
    out << content;
    if (!out) throw NumericalError("failed writing output file: " + path);
}

Eigen::Vector3d rotation_axis_or_z(const trap::RotationSpec& rot) {
    return rot.is_rotating() ? rot.axis() : Eigen::Vector3d::UnitZ();
}

// Principal axis index the rotation is aligned with, or -1.
int aligned_principal_axis(const trap::TrapSpec& spec, const Eigen::Vector3d& n) {
    for (int k = 0; k < 3; ++k)
        if (std::abs(std::abs(n.dot(spec.principal_axes.col(k))) - 1.0) < 1e-12) return k;
    return -1;
}

void run_spectrum(const RunConfig& cfg, const SpectrumParams& p) {
    if (!(p.omega_step > 0) || p.omega_hi < p.omega_lo)
        throw ValidationError("omega range must satisfy lo <= hi, step > 0");
    const Eigen::Vector3d axis = rotation_axis_or_z(cfg.rotation);
    const std::size_t rows =
        static_cast<std::size_t>(std::lround((p.omega_hi - p.omega_lo) / p.omega_step)) + 1;
    const int paxis = aligned_principal_axis(cfg.trap, axis);

    std::vector<std::string> lines(rows);
    parallel_for(rows, cfg.threads, [&](std::size_t i) {
        const double omega = p.omega_lo + static_cast<double>(i) * p.omega_step;
        const auto rot = omega > 0 ? trap::RotationSpec::about_axis(axis, omega)
                                   : trap::RotationSpec::none();
        const auto inv = trap::invariants(cfg.trap, rot);
        const auto fs = spectral::solve_charpoly(spectral::build_charpoly(inv));

        if (paxis >= 0) {
            // Axis-aligned rotation: closed-form cross-check of the roots.
            const double ai = cfg.trap.principal_values((paxis + 1) % 3);
            const double aj = cfg.trap.principal_values((paxis + 2) % 3);
            const auto pm = spectral::omega_pm(ai, aj, omega);
            double best = 1e300;
            for (const auto& w : fs.omega_sq)
                best = std::min(best, std::abs(w - std::complex<double>(pm.minus_sq, 0)));
            if (best > 1e-8 * std::max(1.0, std::abs(pm.minus_sq)))
                log::warn("spectrum: omega_pm cross-check off by %.3e at Omega=%.6f", best,
                          omega);
        }

        std::ostringstream row;
        row << fmt17(omega);
        for (const auto& w : fs.omega_sq)
            row << ',' << fmt17(w.real()) << ',' << fmt17(w.imag());
        row << ',' << spectral::to_string(fs.classification);
        lines[i] = row.str();
    });

    std::ostringstream out;
    out << "omega,re_w1sq,im_w1sq,re_w2sq,im_w2sq,re_w3sq,im_w3sq,classification\n";
    for (const auto& l : lines) out << l << '\n';
    write_file(p.out, out.str());
}

void run_window(const RunConfig& cfg, const WindowParams& p) {
    const Eigen::Vector3d axis = rotation_axis_or_z(cfg.rotation);
    const auto w = spectral::instability_window(cfg.trap, axis);

    const auto inv = trap::invariants(cfg.trap, trap::RotationSpec::about_axis(axis, 1.0));
    const auto disc = spectral::discriminant(inv);
    log::debug("window: discriminant invariant form %.6e, principal form %.6e",
               disc.invariant_form, disc.principal_form);

    json j;
    j["lo"] = w.lo;
    j["hi"] = w.hi;
    j["degenerate"] = w.degenerate;
    const std::string text = j.dump() + "\n";
    if (p.out.empty())
        std::cout << text;
    else
        write_file(p.out, text);
}

void run_trajectory(const RunConfig& cfg, const TrajectoryParams& p) {
    classical::ClassicalState s0{p.r0, p.v0, 0.0};
    classical::IntegrateOptions opts;
    opts.force_dt = p.force_dt;

    classical::Trajectory traj;
    if (p.frame == classical::Frame::Lab) {
        const auto schedule = cfg.rotation.is_rotating()
                                  ? classical::TrapSchedule::rotating(cfg.trap, cfg.rotation)
                                  : classical::TrapSchedule::fixed(cfg.trap);
        traj = classical::integrate_lab(schedule, s0, p.t_end, p.dt, opts);
        const auto fb = classical::action_boundary(traj);
        double dev = 0;
        for (std::size_t i = 0; i < fb.size(); ++i)
            dev = std::max(dev, std::abs(fb[i] - traj.action[i]));
        log::info("trajectory: |action - boundary form| <= %.3e", dev);
    } else {
        traj = classical::integrate_rotating(cfg.trap, cfg.rotation, s0, p.t_end, p.dt, opts);
    }

    std::ostringstream out;
    out << "t,Rx,Ry,Rz,Vx,Vy,Vz,f\n";
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const auto& s = traj.samples[i];
        out << fmt17(s.time);
        for (int d = 0; d < 3; ++d) out << ',' << fmt17(s.position(d));
        for (int d = 0; d < 3; ++d) out << ',' << fmt17(s.velocity(d));
        out << ',' << fmt17(traj.action[i]) << '\n';
    }
    write_file(p.out, out.str());
}

void dump_snapshot(const std::string& prefix, const grid::GridWavefunction& w) {
    std::ostringstream tag;
    tag << prefix << "_t" << fmt17(w.t);
    {
        std::ofstream bin(tag.str() + ".bin", std::ios::binary);
        if (!bin) throw ValidationError("cannot open snapshot file " + tag.str() + ".bin");
        for (const auto& z : w.psi) {
            const double re = z.real(), im = z.imag();
            bin.write(reinterpret_cast<const char*>(&re), sizeof(double));
            bin.write(reinterpret_cast<const char*>(&im), sizeof(double));
        }
    }
    json side;
    side["dim"] = w.grid.dim;
    side["points"] = w.grid.points;
    side["extent"] = w.grid.extent;
    side["t"] = w.t;
    side["norm"] = w.norm();
    side["layout"] = "little-endian float64 interleaved re,im; 2D row-major (x1 outer)";
    write_file(tag.str() + ".json", side.dump(2) + "\n");
}

void run_verify_family(const RunConfig& cfg, const VerifyFamilyParams& p) {
    if (p.mod_amp != 0 && !(p.mod_freq > 0))
        throw ValidationError("mod_amp requires mod_freq > 0");
    // 1D restriction of the trap: smallest principal frequency-squared.
    const double a = cfg.trap.principal_values(0);

    grid::GridSpec g{1, p.extent, p.points};
    g.validate();

    const Eigen::MatrixXd base = a * Eigen::MatrixXd::Identity(1, 1);
    meanfield::GridTrap gtrap = meanfield::GridTrap::matrix(base);
    classical::TrapSchedule schedule = classical::TrapSchedule::fixed(cfg.trap);
    if (p.mod_amp != 0) {
        const double amp = p.mod_amp, freq = p.mod_freq;
        gtrap = meanfield::GridTrap::modulated(
            base, [amp, freq](double t) { return 1.0 + amp * std::sin(freq * t); },
            1.0 + std::abs(amp));
        const Eigen::Matrix3d A3 = cfg.trap.matrix;
        schedule = classical::TrapSchedule::custom(
            [A3, amp, freq](double t) -> Eigen::Matrix3d {
                return (1.0 + amp * std::sin(freq * t)) * A3;
            },
            std::sqrt(cfg.trap.principal_values(2) * (1.0 + std::abs(amp))));
    }

    meanfield::NonlinearitySpec nl{p.g, {}};
    const auto gs = meanfield::ground_state(g, gtrap, nl, 1.0);

    if (p.t_checks.empty()) throw ValidationError("t_checks must not be empty");
    const double t_max = *std::max_element(p.t_checks.begin(), p.t_checks.end());
    classical::ClassicalState s0{Eigen::Vector3d(p.r0, 0, 0), Eigen::Vector3d::Zero(), 0.0};
    const auto traj = classical::integrate_lab(schedule, s0, t_max, p.dt);

    meanfield::VerifyFamilyOptions vopts;
    vopts.dt = p.dt;
    if (p.dump_prefix) dump_snapshot(*p.dump_prefix + "_initial", gs.psi);

    const auto report = meanfield::verify_family(gs.psi, traj, gtrap, nl, p.t_checks, vopts);

    json j;
    j["scenario"] = "verify-family";
    j["g"] = p.g;
    j["r0"] = p.r0;
    j["a"] = a;
    j["mod_amp"] = p.mod_amp;
    j["mod_freq"] = p.mod_freq;
    j["ground_state_mu"] = gs.mu;
    j["l2_tol"] = report.l2_tol;
    j["com_tol"] = report.com_tol;
    j["max_l2"] = report.max_l2;
    j["max_com"] = report.max_com_tracked;
    j["passed"] = report.passed;
    j["checks"] = json::array();
    for (const auto& c : report.checks) {
        json e;
        e["t"] = c.t;
        e["l2"] = c.l2_distance;
        e["com"] = c.com_mismatch;
        j["checks"].push_back(e);
    }
    write_file(p.out, j.dump(2) + "\n");
}

void run_fewbody(const RunConfig& cfg, const FewBodyParams& p) {
    (void)cfg;
    fewbody::FewBodyProblem prob;
    prob.a = p.a;
    prob.interaction = p.interaction;
    prob.grid = grid::GridSpec{2, p.extent, p.points};

    const auto H = fewbody::build_hamiltonian(prob);
    const auto spec = fewbody::diagonalize(H, prob, p.k);

    json j;
    j["scenario"] = "fewbody";
    j["a"] = p.a;
    switch (p.interaction.kind) {
        case fewbody::Interaction::Kind::Harmonic:
            j["interaction"] = {{"kind", "harmonic"}, {"kappa", p.interaction.kappa}};
            break;
        case fewbody::Interaction::Kind::Gaussian:
            j["interaction"] = {{"kind", "gaussian"}, {"g", p.interaction.g},
                                {"s", p.interaction.s}};
            break;
    }
    j["grid"] = {{"points", p.points}, {"extent", p.extent}};
    j["eigenvalues"] = std::vector<double>(
        spec.eigenvalues.data(), spec.eigenvalues.data() + spec.eigenvalues.size());
    j["exchange_parity"] = spec.exchange_parity;
    j["max_residual"] = spec.max_residual;

    if (p.k >= 10) {
        const auto fit = fewbody::ladder_decompose(spec.eigenvalues, p.a);
        json lad;
        lad["spacing_used"] = fit.spacing_used;
        lad["spacing_fitted"] = fit.spacing_fitted;
        lad["max_residual"] = fit.max_residual;
        lad["residual_ok"] = fit.residual_ok;
        lad["bases"] = fit.base_energies;
        lad["assignments"] = json::array();
        for (const auto& a : fit.assignments)
            lad["assignments"].push_back({{"state", a.state},
                                          {"ladder", a.ladder},
                                          {"rung", a.rung},
                                          {"residual", a.residual}});
        j["ladder"] = lad;
    } else {
        j["ladder"] = nullptr;
        log::warn("fewbody: ladder fit skipped, needs k >= 10 (got %d)", p.k);
    }

    if (p.displace_r0) {
        const auto ground = fewbody::state_from_vector(prob, spec.eigenvectors.col(0));
        const auto before = fewbody::relative_marginal(ground);
        classical::ClassicalState st{Eigen::Vector3d(*p.displace_r0, 0, 0),
                                     Eigen::Vector3d::Zero(), 0.0};
        const auto moved = fewbody::transform_two_body(ground, st, 0.0);
        const auto after = fewbody::relative_marginal(moved);
        double max_delta = 0;
        for (std::size_t i = 0; i < before.size(); ++i)
            max_delta = std::max(max_delta, std::abs(after[i] - before[i]));
        json d;
        d["r0"] = *p.displace_r0;
        d["marginal_max_delta"] = max_delta;
        d["com_before"] = fewbody::com_coordinate(ground);
        d["com_after"] = fewbody::com_coordinate(moved);
        j["displacement_check"] = d;
    }
    write_file(p.out, j.dump(2) + "\n");
}

}  // namespace

int run(const RunConfig& cfg) {
    try {
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, SpectrumParams>) run_spectrum(cfg, p);
                if constexpr (std::is_same_v<T, WindowParams>) run_window(cfg, p);
                if constexpr (std::is_same_v<T, TrajectoryParams>) run_trajectory(cfg, p);
                if constexpr (std::is_same_v<T, VerifyFamilyParams>) run_verify_family(cfg, p);
                if constexpr (std::is_same_v<T, FewBodyParams>) run_fewbody(cfg, p);
            },
            cfg.params);
        return 0;
    } catch (const ValidationError& e) {
        json err;
        err["error"] = {{"type", "validation"}, {"message", e.what()}};
        std::cerr << err.dump() << std::endl;
        return 1;
    } catch (const NumericalError& e) {
        json err;
        err["error"] = {{"type", "numerical"}, {"message", e.what()}};
        std::cerr << err.dump() << std::endl;
        return 2;
    }
}

}  // namespace comtrap::cli
