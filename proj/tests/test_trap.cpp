#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "comtrap/errors.hpp"
#include "comtrap/trap.hpp"
#include "helpers.hpp"

using namespace comtrap;
using trap::make_trap;
using trap::make_trap_from_matrix;
using trap::RotationSpec;

TEST_CASE("isotropic trap is the identity matrix") {
    const auto t = make_trap(1, 1, 1);
    CHECK((t.matrix - Eigen::Matrix3d::Identity()).norm() == doctest::Approx(0).epsilon(1e-14));
}

TEST_CASE("diagonal construction keeps principal values and invariants") {
    const auto t = make_trap(1, 2, 3);
    CHECK(t.principal_values(0) == doctest::Approx(1));
    CHECK(t.principal_values(1) == doctest::Approx(2));
    CHECK(t.principal_values(2) == doctest::Approx(3));
    const auto inv = trap::invariants(t, RotationSpec::none());
    CHECK(inv.trA == doctest::Approx(6).epsilon(1e-14));
    CHECK(inv.detA == doctest::Approx(6).epsilon(1e-12));
}

TEST_CASE("invariants survive a 30 degree rotation about z") {
    const double c = std::cos(M_PI / 6), s = std::sin(M_PI / 6);
    Eigen::Matrix3d rot;
    rot << c, -s, 0, s, c, 0, 0, 0, 1;
    const auto t = make_trap(1, 2, 3, rot);

    // Independent check: explicit matrix product R diag R^T.
    Eigen::Matrix3d expect = rot * Eigen::Vector3d(1, 2, 3).asDiagonal() * rot.transpose();
    CHECK((t.matrix - expect).cwiseAbs().maxCoeff() < 1e-14);

    const auto inv = trap::invariants(t, RotationSpec::none());
    CHECK(inv.trA == doctest::Approx(6).epsilon(1e-13));
    CHECK(inv.detA == doctest::Approx(6).epsilon(1e-12));
    CHECK(inv.trA2 == doctest::Approx(14).epsilon(1e-13));
}

TEST_CASE("non-positive frequencies are rejected, naming the axis") {
    CHECK_THROWS_WITH_AS(make_trap(1, -2, 3), doctest::Contains("along y"), ValidationError);
    CHECK_THROWS_WITH_AS(make_trap(0, 1, 1), doctest::Contains("along x"), ValidationError);
    CHECK_THROWS_AS(make_trap(1, 1, -1), ValidationError);
}

TEST_CASE("asymmetric matrices are rejected, near-symmetric symmetrized") {
    Eigen::Matrix3d bad = Eigen::Matrix3d::Identity();
    bad(0, 1) = 0.5;
    CHECK_THROWS_AS(make_trap_from_matrix(bad), ValidationError);

    Eigen::Matrix3d ok = Eigen::Vector3d(1, 2, 3).asDiagonal();
    ok(0, 1) = 1e-14;  // within the 1e-12 relative band
    const auto t = make_trap_from_matrix(ok);
    CHECK(t.matrix(0, 1) == t.matrix(1, 0));
}

TEST_CASE("indefinite matrices are rejected") {
    Eigen::Matrix3d m = Eigen::Vector3d(1, 2, -0.1).asDiagonal();
    CHECK_THROWS_AS(make_trap_from_matrix(m), ValidationError);
}

TEST_CASE("principal decomposition reconstructs the matrix") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 50; ++i) {
        const auto t = testutil::random_trap(rng);
        const Eigen::Matrix3d rebuilt = t.principal_axes *
                                        t.principal_values.asDiagonal() *
                                        t.principal_axes.transpose();
        const double rel = (rebuilt - t.matrix).norm() / t.matrix.norm();
        CHECK(rel < 1e-10);
        CHECK(t.principal_axes.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("invariants: isotropic trap with slow rotation") {
    const auto t = make_trap(1, 1, 1);
    const auto inv = trap::invariants(t, RotationSpec{{0, 0, 0.5}});
    CHECK(inv.trA == doctest::Approx(3).epsilon(1e-14));
    CHECK(inv.detA == doctest::Approx(1).epsilon(1e-14));
    CHECK(inv.nAn == doctest::Approx(1).epsilon(1e-14));
    CHECK(inv.nA2n == doctest::Approx(1).epsilon(1e-14));
    CHECK(inv.omega2 == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(inv.axis_defined);
}

TEST_CASE("invariants: axis-aligned pick of a_z") {
    const auto t = make_trap(1, 2, 3);
    const auto inv = trap::invariants(t, RotationSpec::about_z(1.0));
    CHECK(inv.nAn == doctest::Approx(3).epsilon(1e-14));
    CHECK(inv.nA2n == doctest::Approx(9).epsilon(1e-14));
}

TEST_CASE("invariants: diagonal contraction along (1,1,1)") {
    const auto t = make_trap(1, 2, 3);
    const Eigen::Vector3d n = Eigen::Vector3d(1, 1, 1).normalized();
    const auto inv = trap::invariants(t, RotationSpec::about_axis(n, 1.0));
    CHECK(inv.nAn == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(inv.nA2n == doctest::Approx(14.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("zero rotation leaves axis scalars unused") {
    const auto t = make_trap(1, 2, 3);
    const auto inv = trap::invariants(t, RotationSpec::none());
    CHECK_FALSE(inv.axis_defined);
    CHECK(inv.nAn == 0);
    CHECK(inv.nA2n == 0);
    CHECK_THROWS_AS(RotationSpec::none().axis(), ValidationError);
}

TEST_CASE("property: spectrum invariants unchanged under conjugation") {
    std::mt19937_64 rng(1234);
    for (int i = 0; i < 200; ++i) {
        const auto t = testutil::random_trap(rng);
        const auto rot = RotationSpec::about_axis(testutil::random_unit(rng), 1.7);
        const auto inv = trap::invariants(t, rot);

        const Eigen::Matrix3d q = testutil::random_rotation(rng);
        const auto t2 = make_trap_from_matrix(q * t.matrix * q.transpose());
        const RotationSpec rot2{q * rot.omega};
        const auto inv2 = trap::invariants(t2, rot2);

        CHECK(inv2.trA == doctest::Approx(inv.trA).epsilon(1e-12));
        CHECK(inv2.trA2 == doctest::Approx(inv.trA2).epsilon(1e-12));
        CHECK(inv2.detA == doctest::Approx(inv.detA).epsilon(1e-12));
        CHECK(inv2.nAn == doctest::Approx(inv.nAn).epsilon(1e-11));
        CHECK(inv2.nA2n == doctest::Approx(inv.nA2n).epsilon(1e-11));
    }
}

TEST_CASE("property: principal-axis contraction returns the eigenvalue") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 100; ++i) {
        const auto t = testutil::random_trap(rng);
        for (int k = 0; k < 3; ++k) {
            const auto rot = RotationSpec::about_axis(t.principal_axes.col(k), 2.0);
            const auto inv = trap::invariants(t, rot);
            const double a_k = t.principal_values(k);
            CHECK(inv.nAn == doctest::Approx(a_k).epsilon(1e-13));
            CHECK(inv.nA2n == doctest::Approx(a_k * a_k).epsilon(1e-13));
        }
    }
}

TEST_CASE("euler zyz convention") {
    CHECK((trap::euler_zyz_deg(0, 0, 0) - Eigen::Matrix3d::Identity()).norm() < 1e-15);
    // 90 about z maps x to y.
    const Eigen::Vector3d v = trap::euler_zyz_deg(90, 0, 0) * Eigen::Vector3d::UnitX();
    CHECK(v(1) == doctest::Approx(1.0).epsilon(1e-14));
    // Orthonormality for generic angles.
    const Eigen::Matrix3d r = trap::euler_zyz_deg(10, 20, 30);
    CHECK((r * r.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-14);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-14));
}
