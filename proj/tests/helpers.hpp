#pragma once

#include <array>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "comtrap/spectral.hpp"
#include "comtrap/trap.hpp"

namespace testutil {

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::Matrix3d> qr(m);
    Eigen::Matrix3d q = qr.householderQ();
    if (q.determinant() < 0) q.col(0) *= -1.0;
    return q;
}

inline Eigen::Vector3d random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Vector3d v;
    do {
        v = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    } while (v.norm() < 1e-3);
    return v.normalized();
}

inline comtrap::trap::TrapSpec random_trap(std::mt19937_64& rng, double lo = 0.3,
                                           double hi = 9.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    return comtrap::trap::make_trap(u(rng), u(rng), u(rng), random_rotation(rng));
}

/// Analytic cubic roots (trigonometric / Cardano branches), the
/// independent oracle for the companion-matrix path.
inline std::array<std::complex<double>, 3> cardano_roots(double c4, double c2, double c0) {
    // Depressed cubic t^3 + p t + q with w = t - c4/3.
    const double shift = c4 / 3.0;
    const double p = c2 - c4 * c4 / 3.0;
    const double q = 2.0 * c4 * c4 * c4 / 27.0 - c4 * c2 / 3.0 + c0;
    const double disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);

    std::array<std::complex<double>, 3> roots;
    if (disc <= 0.0) {
        // Three real roots: trigonometric form.
        const double m = 2.0 * std::sqrt(std::max(0.0, -p / 3.0));
        const double arg = m == 0.0 ? 0.0
                                    : std::clamp(3.0 * q / (p * m), -1.0, 1.0);
        const double phi = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k)
            roots[k] = m * std::cos(phi - 2.0 * M_PI * k / 3.0) - shift;
    } else {
        const double s = std::sqrt(disc);
        const double u = std::cbrt(-q / 2.0 + s);
        const double v = std::cbrt(-q / 2.0 - s);
        roots[0] = u + v - shift;
        const std::complex<double> i(0.0, 1.0);
        roots[1] = -0.5 * (u + v) - shift + i * (std::sqrt(3.0) / 2.0) * (u - v);
        roots[2] = std::conj(roots[1]);
    }
    return roots;
}

inline std::array<std::complex<double>, 3> sorted_roots(
    std::array<std::complex<double>, 3> r) {
    std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return r;
}

}  // namespace testutil
