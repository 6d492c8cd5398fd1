#include "comtrap/trap.hpp"

#include <cmath>
#include <sstream>

#include "comtrap/errors.hpp"

namespace comtrap::trap {

bool TrapSpec::fully_anisotropic(double rel_tol) const {
    const double scale = principal_values(2);
    return principal_values(1) - principal_values(0) > rel_tol * scale &&
           principal_values(2) - principal_values(1) > rel_tol * scale;
}

Eigen::Vector3d RotationSpec::axis() const {
    const double m = magnitude();
    if (m <= 0.0) throw ValidationError("rotation axis undefined: |Omega| = 0");
    return omega / m;
}

RotationSpec RotationSpec::about_z(double speed) {
    return {Eigen::Vector3d(0, 0, speed)};
}

RotationSpec RotationSpec::about_axis(const Eigen::Vector3d& axis, double speed) {
    const double n = axis.norm();
    if (n <= 0.0) throw ValidationError("rotation axis must be a nonzero vector");
    return {axis * (speed / n)};
}

TrapSpec make_trap(double a_x, double a_y, double a_z, const Eigen::Matrix3d& axes) {
    const char* names[3] = {"x", "y", "z"};
    const double vals[3] = {a_x, a_y, a_z};
    for (int i = 0; i < 3; ++i) {
        if (!(vals[i] > 0.0)) {
            std::ostringstream msg;
            msg << "trap frequency-squared along " << names[i] << " must be positive, got "
                << vals[i];
            throw ValidationError(msg.str());
        }
    }
    Eigen::Matrix3d diag = Eigen::Vector3d(a_x, a_y, a_z).asDiagonal();
    return make_trap_from_matrix(axes * diag * axes.transpose());
}

TrapSpec make_trap_from_matrix(const Eigen::Matrix3d& A) {
    const double scale = A.cwiseAbs().maxCoeff();
    const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
    if (scale <= 0.0 || asym > 1e-12 * scale)
        throw ValidationError("trap matrix is not symmetric to 1e-12 relative tolerance");

    TrapSpec spec;
    spec.matrix = 0.5 * (A + A.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(spec.matrix);
    spec.principal_values = es.eigenvalues();  // ascending
    spec.principal_axes = es.eigenvectors();
    if (spec.principal_axes.determinant() < 0) spec.principal_axes.col(0) *= -1.0;

    if (!(spec.principal_values(0) > 0.0)) {
        std::ostringstream msg;
        msg << "trap matrix must be positive definite; smallest eigenvalue "
            << spec.principal_values(0);
        throw ValidationError(msg.str());
    }
    return spec;
}

Invariants invariants(const TrapSpec& trap, const RotationSpec& rot) {
    Invariants inv;
    const Eigen::Matrix3d& A = trap.matrix;
    inv.trA = A.trace();
    inv.trA2 = (A * A).trace();
    inv.detA = A.determinant();
    inv.omega2 = rot.omega.squaredNorm();
    inv.principal_values = trap.principal_values;
    if (rot.is_rotating()) {
        const Eigen::Vector3d n = rot.axis();
        inv.axis_defined = true;
        inv.nAn = n.dot(A * n);
        inv.nA2n = (A * n).squaredNorm();  // n.A^2.n for symmetric A
        inv.axis_principal = trap.principal_axes.transpose() * n;
    }
    return inv;
}

Eigen::Matrix3d euler_zyz_deg(double alpha, double beta, double gamma) {
    const double d = M_PI / 180.0;
    return (Eigen::AngleAxisd(alpha * d, Eigen::Vector3d::UnitZ()) *
            Eigen::AngleAxisd(beta * d, Eigen::Vector3d::UnitY()) *
            Eigen::AngleAxisd(gamma * d, Eigen::Vector3d::UnitZ()))
        .toRotationMatrix();
}

}  // namespace comtrap::trap
