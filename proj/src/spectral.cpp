#include "comtrap/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "comtrap/errors.hpp"

namespace comtrap::spectral {

const char* to_string(Stability s) {
    switch (s) {
        case Stability::Stable: return "stable";
        case Stability::Unstable: return "unstable";
        case Stability::Marginal: return "marginal";
    }
    return "?";
}

CharPoly build_charpoly(const trap::Invariants& inv) {
    const double o2 = inv.omega2;
    const double oAo = o2 * inv.nAn;    // Omega.A.Omega
    const double oA2o = o2 * inv.nA2n;  // Omega.A^2.Omega

    CharPoly p;
    p.c4 = -(2.0 * o2 + inv.trA);
    p.c2 = o2 * o2 + 3.0 * oAo - inv.trA * o2 + 0.5 * inv.trA * inv.trA - 0.5 * inv.trA2;
    p.c0 = -o2 * oAo + inv.trA * oAo - oA2o - inv.detA;
    p.source = inv;
    return p;
}

namespace {

// Double-double helpers (error-free transformations via fma) for the
// compensated Horner evaluation below.
struct Dd {
    double hi = 0;
    double lo = 0;
};

Dd two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    return {s, (a - (s - bb)) + (b - bb)};
}

Dd two_prod(double a, double b) {
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

Dd dd_renorm(double hi, double lo) {
    const double s = hi + lo;
    return {s, lo - (s - hi)};
}

Dd dd_add(const Dd& x, const Dd& y) {
    const Dd s = two_sum(x.hi, y.hi);
    return dd_renorm(s.hi, s.lo + x.lo + y.lo);
}

Dd dd_add_d(const Dd& x, double d) {
    const Dd s = two_sum(x.hi, d);
    return dd_renorm(s.hi, s.lo + x.lo);
}

Dd dd_mul_d(const Dd& x, double d) {
    const Dd p = two_prod(x.hi, d);
    return dd_renorm(p.hi, p.lo + x.lo * d);
}

struct CDd {
    Dd re, im;
};

// acc <- acc * w + c
CDd horner_step(const CDd& acc, std::complex<double> w, double c) {
    CDd out;
    out.re = dd_add_d(dd_add(dd_mul_d(acc.re, w.real()), dd_mul_d(acc.im, -w.imag())), c);
    out.im = dd_add(dd_mul_d(acc.re, w.imag()), dd_mul_d(acc.im, w.real()));
    return out;
}

std::complex<double> eval_compensated(const CharPoly& p, std::complex<double> w) {
    CDd acc{{1.0, 0.0}, {0.0, 0.0}};  // monic leading coefficient
    acc = horner_step(acc, w, p.c4);
    acc = horner_step(acc, w, p.c2);
    acc = horner_step(acc, w, p.c0);
    return {acc.re.hi + acc.re.lo, acc.im.hi + acc.im.lo};
}

std::complex<double> principal_sqrt(std::complex<double> w) {
    return std::sqrt(w);
}

}  // namespace

std::complex<double> polish_cubic_root(const CharPoly& p, std::complex<double> w) {
    for (int it = 0; it < 4; ++it) {
        const std::complex<double> f = eval_compensated(p, w);
        const std::complex<double> df = (3.0 * w + 2.0 * p.c4) * w + p.c2;
        if (std::abs(df) == 0.0) break;
        const std::complex<double> step = f / df;
        if (!std::isfinite(std::abs(step))) break;
        w -= step;
        if (std::abs(step) <= 1e-18 * std::max(1.0, std::abs(w))) break;
    }
    // Real coefficients: a root this close to the real axis is real.
    if (std::abs(w.imag()) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                  std::max(1.0, std::abs(w.real())))
        w = {w.real(), 0.0};
    return w;
}

FrequencySet solve_charpoly(const CharPoly& p) {
    Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
    companion(0, 2) = -p.c0;
    companion(1, 2) = -p.c2;
    companion(2, 2) = -p.c4;
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;

    Eigen::EigenSolver<Eigen::Matrix3d> es(companion);

    FrequencySet fs;
    for (int i = 0; i < 3; ++i) fs.omega_sq[i] = polish_cubic_root(p, es.eigenvalues()(i));
    std::sort(fs.omega_sq.begin(), fs.omega_sq.end(),
              [](const std::complex<double>& a, const std::complex<double>& b) {
                  if (a.real() != b.real()) return a.real() < b.real();
                  return a.imag() < b.imag();
              });
    for (int i = 0; i < 3; ++i) fs.omega[i] = principal_sqrt(fs.omega_sq[i]);

    // Classification per the documented tolerance band: any complex root or
    // negative real root is unstable, a root at zero is marginal.
    fs.classification = Stability::Stable;
    fs.critical_root = -1;
    double min_re = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        const auto w = fs.omega_sq[i];
        const double im_tol = kStabilityTol * std::max(1.0, std::abs(w));
        if (std::abs(w.imag()) > im_tol) {
            fs.classification = Stability::Unstable;
            fs.critical_root = i;
            fs.margin = std::abs(w.imag());
            return fs;
        }
        if (w.real() < min_re) {
            min_re = w.real();
            fs.critical_root = i;
        }
    }
    if (min_re < -kStabilityTol) {
        fs.classification = Stability::Unstable;
        fs.margin = -min_re;
    } else if (min_re <= kStabilityTol) {
        fs.classification = Stability::Marginal;
        fs.margin = std::abs(min_re);
    } else {
        fs.classification = Stability::Stable;
        fs.margin = min_re;
    }
    return fs;
}

OmegaPm omega_pm(double a_x, double a_y, double Omega) {
    if (!(a_x > 0.0) || !(a_y > 0.0))
        throw ValidationError("omega_pm requires positive a_x, a_y");
    const double a_plus = a_x + a_y;
    const double a_minus = a_x - a_y;
    const double s = std::sqrt(a_minus * a_minus + 8.0 * Omega * Omega * a_plus);

    OmegaPm r;
    r.plus_sq = 0.5 * (2.0 * Omega * Omega + a_plus + s);
    r.minus_sq = 0.5 * (2.0 * Omega * Omega + a_plus - s);
    r.plus_imaginary = r.plus_sq < 0.0;
    r.minus_imaginary = r.minus_sq < 0.0;
    r.plus = principal_sqrt(std::complex<double>(r.plus_sq, 0.0));
    r.minus = principal_sqrt(std::complex<double>(r.minus_sq, 0.0));
    return r;
}

Discriminant discriminant(const trap::Invariants& inv) {
    if (!inv.axis_defined)
        throw ValidationError("discriminant requires a defined rotation axis");

    Discriminant d;
    const double b = inv.trA * inv.nAn - inv.nA2n;
    d.invariant_form = b * b - 4.0 * inv.detA * inv.nAn;

    // Principal-frame rearrangement with ascending a_x < a_y < a_z.
    const double ax = inv.principal_values(0);
    const double ay = inv.principal_values(1);
    const double az = inv.principal_values(2);
    const double nx2 = inv.axis_principal(0) * inv.axis_principal(0);
    const double ny2 = inv.axis_principal(1) * inv.axis_principal(1);
    const double nz2 = inv.axis_principal(2) * inv.axis_principal(2);
    const double lead =
        nx2 * ax * (az - ay) + ny2 * ay * (az - ax) + nz2 * az * (ax - ay);
    d.principal_form = lead * lead + 4.0 * ny2 * nz2 * ay * az * (az - ax) * (ay - ax);
    return d;
}

StabilityWindow instability_window(const trap::TrapSpec& spec, const Eigen::Vector3d& axis) {
    const double nrm = axis.norm();
    if (!(nrm > 0.0)) throw ValidationError("instability_window requires a nonzero axis");

    trap::RotationSpec rot = trap::RotationSpec::about_axis(axis, 1.0);
    const trap::Invariants inv = invariants(spec, rot);
    // nAn > 0 for any positive definite trap; guarded as an internal invariant.
    if (!(inv.nAn > 0.0)) throw NumericalError("internal: n.A.n must be positive");

    const double b = inv.trA * inv.nAn - inv.nA2n;  // > 0 for positive traps
    const double disc = b * b - 4.0 * inv.detA * inv.nAn;
    const double disc_scale = b * b + 4.0 * inv.detA * inv.nAn;

    StabilityWindow w;
    if (disc <= 1e-11 * disc_scale) {
        // Double root of the biquadratic: symmetric trap spun about its
        // symmetry axis. No instability region.
        w.degenerate = true;
        w.lo = w.hi = std::sqrt(0.5 * b / inv.nAn);
        return w;
    }
    const double root_hi = (b + std::sqrt(disc)) / (2.0 * inv.nAn);
    const double root_lo = inv.detA / (inv.nAn * root_hi);  // Vieta, avoids cancellation
    w.lo = std::sqrt(root_lo);
    w.hi = std::sqrt(root_hi);
    return w;
}

}  // namespace comtrap::spectral
