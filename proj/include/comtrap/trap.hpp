#pragma once

#include <Eigen/Dense>

namespace comtrap::trap {

/// Harmonic trap: symmetric positive definite 3x3 matrix of squared
/// frequencies (natural units, m = hbar = 1).
struct TrapSpec {
    Eigen::Matrix3d matrix;             // symmetrized input, (A + A^T)/2
    Eigen::Vector3d principal_values;   // eigenvalues, ascending
    Eigen::Matrix3d principal_axes;     // orthonormal columns, det = +1

    double omega_max() const { return std::sqrt(principal_values(2)); }
    double omega_min() const { return std::sqrt(principal_values(0)); }
    bool fully_anisotropic(double rel_tol = 1e-9) const;
};

/// Rigid rotation descriptor. Zero vector means "no rotation"; the axis is
/// defined only when the magnitude is positive.
struct RotationSpec {
    Eigen::Vector3d omega = Eigen::Vector3d::Zero();

    double magnitude() const { return omega.norm(); }
    bool is_rotating() const { return magnitude() > 0.0; }
    Eigen::Vector3d axis() const;  // unit vector; throws if not rotating

    static RotationSpec none() { return {}; }
    static RotationSpec about_z(double speed);
    static RotationSpec about_axis(const Eigen::Vector3d& axis, double speed);
};

/// The six scalars the characteristic equation is built from, plus the
/// principal-frame context needed by the Appendix discriminant form.
struct Invariants {
    double trA = 0;      // Tr A
    double trA2 = 0;     // Tr A^2
    double detA = 0;     // Det A
    double omega2 = 0;   // |Omega|^2
    double nAn = 0;      // n.A.n   (unit axis)
    double nA2n = 0;     // n.A^2.n
    bool axis_defined = false;  // false at Omega = 0: nAn/nA2n are unused zeros

    Eigen::Vector3d principal_values = Eigen::Vector3d::Zero();  // ascending
    Eigen::Vector3d axis_principal = Eigen::Vector3d::Zero();    // n in principal frame
};

/// Build a trap from squared frequencies along given orthonormal axes.
/// Throws ValidationError when a value is not positive, naming the axis.
TrapSpec make_trap(double a_x, double a_y, double a_z,
                   const Eigen::Matrix3d& axes = Eigen::Matrix3d::Identity());

/// Build a trap from a general symmetric positive matrix. The input is
/// symmetrized as (A + A^T)/2 after a 1e-12 relative symmetry check.
TrapSpec make_trap_from_matrix(const Eigen::Matrix3d& A);

Invariants invariants(const TrapSpec& trap, const RotationSpec& rot);

/// Intrinsic z-y-z Euler rotation, angles in degrees.
Eigen::Matrix3d euler_zyz_deg(double alpha, double beta, double gamma);

}  // namespace comtrap::trap
