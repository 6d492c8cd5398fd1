#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "comtrap/classical.hpp"
#include "comtrap/errors.hpp"
#include "comtrap/meanfield.hpp"
#include "comtrap/trap.hpp"

using namespace comtrap;
using classical::ClassicalState;
using classical::TrapSchedule;
using grid::GridSpec;
using grid::GridWavefunction;
using meanfield::displace;
using meanfield::evolve;
using meanfield::GridTrap;
using meanfield::ground_state;
using meanfield::NonlinearitySpec;

namespace {

GridWavefunction unit_gaussian(const GridSpec& g) {
    GridWavefunction w;
    w.grid = g;
    w.t = 0;
    w.psi.resize(g.size());
    for (int i = 0; i < g.points; ++i)
        w.psi[i] = std::exp(-0.5 * g.coord(i) * g.coord(i)) / std::pow(M_PI, 0.25);
    return w;
}

const GridSpec kGrid{1, 10.0, 512};

// Shared across tests; the g=1 ground state is the most used fixture.
const meanfield::GroundStateResult& gs_g1() {
    static const meanfield::GroundStateResult r =
        ground_state(kGrid, GridTrap::isotropic(1, 1.0), NonlinearitySpec{1.0, {}}, 1.0);
    return r;
}

double max_density_delta(const GridWavefunction& a, const GridWavefunction& b) {
    double m = 0;
    for (size_t i = 0; i < a.psi.size(); ++i)
        m = std::max(m, std::abs(std::norm(a.psi[i]) - std::norm(b.psi[i])));
    return m;
}

classical::Trajectory cosine_trajectory(double r0, double t_end, double dt) {
    return classical::integrate_lab(TrapSchedule::fixed(trap::make_trap(1, 1, 1)),
                                    {{r0, 0, 0}, {0, 0, 0}, 0.0}, t_end, dt);
}

}  // namespace

TEST_CASE("grid validation") {
    CHECK_THROWS_AS((GridSpec{1, 10.0, 60}).validate(), ValidationError);
    CHECK_THROWS_AS((GridSpec{1, 10.0, 96}).validate(), ValidationError);
    CHECK_THROWS_AS((GridSpec{3, 10.0, 128}).validate(), ValidationError);
    CHECK_THROWS_AS((GridSpec{1, -1.0, 128}).validate(), ValidationError);
    CHECK_NOTHROW((GridSpec{2, 5.0, 64}).validate());
}

TEST_CASE("linear ground state is stationary with phase e^{-it/2}") {
    const auto psi0 = unit_gaussian(kGrid);
    const auto trap1 = GridTrap::isotropic(1, 1.0);
    const auto w = evolve(psi0, trap1, NonlinearitySpec{}, 2 * M_PI, 1e-3);
    CHECK(max_density_delta(w, psi0) < 1e-9);
    double phase_dev = 0;
    for (size_t i = 0; i < w.psi.size(); ++i) {
        if (std::abs(psi0.psi[i]) < 1e-6) continue;
        const auto ratio =
            w.psi[i] * std::exp(std::complex<double>(0, 0.5 * w.t)) / psi0.psi[i];
        phase_dev = std::max(phase_dev, std::abs(ratio - 1.0));
    }
    CHECK(phase_dev < 1e-6);
}

TEST_CASE("norm is conserved in real time") {
    const auto& gs = gs_g1();
    const auto w = evolve(gs.psi, GridTrap::isotropic(1, 1.0), NonlinearitySpec{1.0, {}},
                          5.0, 1e-3);
    CHECK(std::abs(w.norm() - gs.psi.norm()) < 1e-10 * 5.0);
}

TEST_CASE("displaced linear packet follows cos t (Ehrenfest)") {
    const auto psi0 = unit_gaussian(kGrid);
    const auto trap1 = GridTrap::isotropic(1, 1.0);
    auto moved = displace(psi0, {{1.0, 0, 0}, {0, 0, 0}, 0.0}, 0.0);
    for (double t : {1.0, 2.5, 2 * M_PI}) {
        const auto w = evolve(moved, trap1, NonlinearitySpec{}, t, 1e-3);
        CHECK(std::abs(meanfield::com_expectation(w)(0) - std::cos(w.t)) < 1e-6);
    }
}

TEST_CASE("interacting ground state stays put for five periods") {
    const auto& gs = gs_g1();
    CHECK(gs.residual <= 5e-8);
    const auto w = evolve(gs.psi, GridTrap::isotropic(1, 1.0), NonlinearitySpec{1.0, {}},
                          5 * 2 * M_PI, 5e-4);
    CHECK(max_density_delta(w, gs.psi) < 1e-7);
}

TEST_CASE("linear ground state from imaginary time has <x^2> = 1/2") {
    const auto r = ground_state(kGrid, GridTrap::isotropic(1, 1.0), NonlinearitySpec{}, 1.0);
    CHECK(r.mu == doctest::Approx(0.5).epsilon(1e-8));
    double x2 = 0;
    const double dx = kGrid.spacing();
    for (int i = 0; i < kGrid.points; ++i)
        x2 += kGrid.coord(i) * kGrid.coord(i) * std::norm(r.psi.psi[i]) * dx;
    CHECK(std::abs(x2 - 0.5) < 1e-6);
}

TEST_CASE("strong coupling approaches the Thomas-Fermi profile") {
    const double g = 100.0;
    const GridSpec wide{1, 12.0, 512};
    const auto r = ground_state(wide, GridTrap::isotropic(1, 1.0),
                                NonlinearitySpec{g, {}}, 1.0);
    const double mu_tf = std::pow(3.0 * g / (4.0 * std::sqrt(2.0)), 2.0 / 3.0);
    CHECK(r.mu == doctest::Approx(mu_tf).epsilon(0.02));
    for (int i = 0; i < wide.points; ++i) {
        const double x = wide.coord(i);
        const double v = 0.5 * x * x;
        if (v > 0.6 * mu_tf) continue;  // interior only, away from the edge layer
        const double rho_tf = (r.mu - v) / g;
        CHECK(std::norm(r.psi.psi[i]) == doctest::Approx(rho_tf).epsilon(0.02));
    }
}

TEST_CASE("imaginary-time energy decreases monotonically") {
    meanfield::GroundStateOptions opts;
    opts.record_energy = true;
    const auto r = ground_state(kGrid, GridTrap::isotropic(1, 1.0),
                                NonlinearitySpec{1.0, {}}, 1.0, opts);
    REQUIRE(r.energy_history.size() > 100);
    for (size_t i = 1; i < r.energy_history.size(); ++i)
        CHECK(r.energy_history[i] <= r.energy_history[i - 1] +
                                         1e-10 * std::abs(r.energy_history[i - 1]));
}

TEST_CASE("ground state reports non-convergence with the residual") {
    meanfield::GroundStateOptions opts;
    opts.max_iterations = 10;
    CHECK_THROWS_AS(ground_state(kGrid, GridTrap::isotropic(1, 1.0),
                                 NonlinearitySpec{1.0, {}}, 1.0, opts),
                    NumericalError);
    CHECK_THROWS_AS(
        ground_state(kGrid, GridTrap::isotropic(1, 1.0), NonlinearitySpec{}, -1.0),
        ValidationError);
}

TEST_CASE("displacement transform basics") {
    const auto psi0 = unit_gaussian(kGrid);

    SUBCASE("zero displacement is the identity") {
        const auto w = displace(psi0, {{0, 0, 0}, {0, 0, 0}, 0.0}, 0.0);
        double dev = 0;
        for (size_t i = 0; i < w.psi.size(); ++i)
            dev = std::max(dev, std::abs(w.psi[i] - psi0.psi[i]));
        CHECK(dev < 1e-14);
    }

    SUBCASE("norm is preserved, density is shifted") {
        const ClassicalState s{{1.3, 0, 0}, {0.4, 0, 0}, 0.0};
        const auto w = displace(psi0, s, 0.2);
        CHECK(std::abs(w.norm() - psi0.norm()) < 1e-12);
        // Against the analytic shifted Gaussian: the spectral shift is exact
        // for band-limited fields.
        double dev = 0;
        for (int i = 0; i < kGrid.points; ++i) {
            const double x = kGrid.coord(i) - 1.3;
            dev = std::max(dev,
                           std::abs(std::norm(w.psi[i]) - std::exp(-x * x) / std::sqrt(M_PI)));
        }
        CHECK(dev < 1e-10);
    }

    SUBCASE("shift near the boundary aborts") {
        CHECK_THROWS_AS(displace(psi0, {{7.5, 0, 0}, {0, 0, 0}, 0.0}, 0.0), NumericalError);
    }
}

TEST_CASE("solution family: zero trajectory gives identical paths") {
    const auto& gs = gs_g1();
    const auto traj = cosine_trajectory(0.0, 1.0, 1e-3);
    const auto report = meanfield::verify_family(gs.psi, traj, GridTrap::isotropic(1, 1.0),
                                                 NonlinearitySpec{1.0, {}}, {1.0});
    CHECK(report.max_l2 < 1e-12);
    CHECK(report.passed);
}

TEST_CASE("solution family holds over one period for g = 1") {
    const auto& gs = gs_g1();
    const double dt = 1e-3;
    const double period = std::round(2 * M_PI / dt) * dt;
    const auto traj = cosine_trajectory(0.7, period, dt);
    const auto report =
        meanfield::verify_family(gs.psi, traj, GridTrap::isotropic(1, 1.0),
                                 NonlinearitySpec{1.0, {}}, {period / 2, period});
    CHECK(report.max_l2 <= 1e-5);
    CHECK(report.max_com_tracked <= 1e-5);
    CHECK(report.passed);
}

TEST_CASE("solution family holds for a modulated trap") {
    const double amp = 0.1, freq = 0.3;
    auto factor = [=](double t) { return 1.0 + amp * std::sin(freq * t); };
    const auto gtrap = GridTrap::modulated(Eigen::MatrixXd::Identity(1, 1), factor, 1.1);
    const auto gs = ground_state(kGrid, gtrap, NonlinearitySpec{1.0, {}}, 1.0);

    const double dt = 1e-3;
    const double t_end = std::round(2 * M_PI / dt) * dt;
    const auto sched = TrapSchedule::custom(
        [=](double t) -> Eigen::Matrix3d { return factor(t) * Eigen::Matrix3d::Identity(); },
        std::sqrt(1.1));
    const auto traj =
        classical::integrate_lab(sched, {{0.7, 0, 0}, {0, 0, 0}, 0.0}, t_end, dt);
    const auto report = meanfield::verify_family(gs.psi, traj, gtrap,
                                                 NonlinearitySpec{1.0, {}}, {t_end});
    CHECK(report.max_l2 <= 1e-5);
    CHECK(report.max_com_tracked <= 1e-5);
}

TEST_CASE("family mismatch shrinks ~4x when dt is halved") {
    const auto& gs = gs_g1();
    const double t_end = 2.048;  // divisible by both steps
    auto mismatch = [&](double dt) {
        const auto traj = cosine_trajectory(0.7, t_end, dt);
        meanfield::VerifyFamilyOptions opts;
        opts.dt = dt;
        return meanfield::verify_family(gs.psi, traj, GridTrap::isotropic(1, 1.0),
                                        NonlinearitySpec{1.0, {}}, {t_end}, opts)
            .max_l2;
    };
    const double m1 = mismatch(4e-3);
    const double m2 = mismatch(2e-3);
    CHECK(m1 / m2 > 3.0);
    CHECK(m1 / m2 < 5.3);
}

TEST_CASE("quartic perturbation destroys the family property") {
    const GridSpec g{1, 8.0, 512};
    const auto trap1 = GridTrap::isotropic(1, 1.0);
    const NonlinearitySpec nl{1.0, {}};
    const auto gs = ground_state(g, trap1, nl, 1.0);

    const double dt = 1e-3;
    const double t_end = 1.0;
    const auto traj = cosine_trajectory(0.5, t_end, dt);

    meanfield::VerifyFamilyOptions clean;
    clean.dt = dt;
    const double base = meanfield::verify_family(gs.psi, traj, trap1, nl, {t_end}, clean).max_l2;

    meanfield::VerifyFamilyOptions broken = clean;
    broken.evolve.extra_potential = meanfield::sample_potential(
        g, [](double x, double) { return 0.05 * x * x * x * x; });
    const double bad =
        meanfield::verify_family(gs.psi, traj, trap1, nl, {t_end}, broken).max_l2;
    CHECK(bad / std::max(base, 1e-300) >= 1e3);
}

TEST_CASE("Ehrenfest: <x> obeys the classical equation") {
    const auto& gs = gs_g1();
    const auto trap1 = GridTrap::isotropic(1, 1.0);
    const NonlinearitySpec nl{1.0, {}};
    auto w = displace(gs.psi, {{0.7, 0, 0}, {0, 0, 0}, 0.0}, 0.0);

    const double h = 0.02;
    std::vector<double> com;
    for (int i = 0; i <= 100; ++i) {
        com.push_back(meanfield::com_expectation(w)(0));
        if (i < 100) w = evolve(w, trap1, nl, w.t + h, 1e-3);
    }
    for (size_t i = 1; i + 1 < com.size(); ++i) {
        const double acc = (com[i + 1] - 2 * com[i] + com[i - 1]) / (h * h);
        CHECK(std::abs(acc + com[i]) < 1e-4);
    }
}

TEST_CASE("GP energy is conserved in a static trap") {
    const auto& gs = gs_g1();
    const auto trap1 = GridTrap::isotropic(1, 1.0);
    const NonlinearitySpec nl{1.0, {}};
    const auto moved = displace(gs.psi, {{0.7, 0, 0}, {0, 0, 0}, 0.0}, 0.0);
    const double e0 = meanfield::gp_energy(moved, trap1, nl);
    const auto w = evolve(moved, trap1, nl, 2 * M_PI, 1e-3);
    CHECK(std::abs(meanfield::gp_energy(w, trap1, nl) - e0) / std::abs(e0) < 1e-8);
}

TEST_CASE("evolve preconditions") {
    const auto psi0 = unit_gaussian(kGrid);
    const auto trap1 = GridTrap::isotropic(1, 4.0);  // omega_max = 2
    CHECK_THROWS_AS(evolve(psi0, trap1, NonlinearitySpec{}, 1.0, 0.06), ValidationError);
    meanfield::EvolveOptions force;
    force.force_dt = true;
    CHECK_NOTHROW(evolve(psi0, trap1, NonlinearitySpec{}, 0.12, 0.06, force));

    // Phase-wrap guard: |V| dt > 0.5 on a wide grid.
    const GridSpec wide{1, 40.0, 1024};
    CHECK_THROWS_AS(evolve(unit_gaussian(wide), GridTrap::isotropic(1, 1.0),
                           NonlinearitySpec{}, 1.0, 2e-3),
                    ValidationError);
}

TEST_CASE("boundary leak aborts the evolution") {
    const GridSpec tight{1, 5.0, 128};
    GridWavefunction fat;
    fat.grid = tight;
    fat.t = 0;
    fat.psi.resize(tight.size());
    for (int i = 0; i < tight.points; ++i)
        fat.psi[i] = std::exp(-tight.coord(i) * tight.coord(i) / 50.0);
    CHECK_THROWS_AS(evolve(fat, GridTrap::isotropic(1, 1.0), NonlinearitySpec{}, 0.5, 1e-3),
                    NumericalError);
}

TEST_CASE("com_expectation symmetry and shift") {
    const auto psi0 = unit_gaussian(kGrid);
    CHECK(std::abs(meanfield::com_expectation(psi0)(0)) < 1e-12);
    const auto moved = displace(psi0, {{0.9, 0, 0}, {0, 0, 0}, 0.0}, 0.0);
    CHECK(meanfield::com_expectation(moved)(0) ==
          doctest::Approx(0.9).epsilon(1e-9));
}

TEST_CASE("custom nonlinearity plugs in as a function of |psi|") {
    // Cubic-quintic: G = g1 |psi|^2 + g2 |psi|^4.
    NonlinearitySpec nl;
    nl.custom = [](double amp) {
        const double d = amp * amp;
        return 0.5 * d + 0.1 * d * d;
    };
    const auto r = ground_state(kGrid, GridTrap::isotropic(1, 1.0), nl, 1.0);
    CHECK(r.residual <= 5e-8);
    const auto w = evolve(r.psi, GridTrap::isotropic(1, 1.0), nl, 2.0, 1e-3);
    CHECK(max_density_delta(w, r.psi) < 1e-7);
    CHECK_THROWS_AS(meanfield::gp_energy(r.psi, GridTrap::isotropic(1, 1.0), nl),
                    ValidationError);
}
