#pragma once

#include <array>
#include <complex>

#include "comtrap/trap.hpp"

namespace comtrap::spectral {

/// Characteristic polynomial of the rotating-frame center-of-mass
/// oscillator, monic in w = omega^2:  w^3 + c4 w^2 + c2 w + c0.
struct CharPoly {
    double c4 = 0;
    double c2 = 0;
    double c0 = 0;
    trap::Invariants source;

    std::complex<double> eval(std::complex<double> w) const {
        return ((w + c4) * w + c2) * w + c0;
    }
};

enum class Stability { Stable, Unstable, Marginal };

const char* to_string(Stability s);

/// Classification tolerance: |Im w| <= tol*max(1,|w|) counts as real,
/// and |Re w| <= tol (absolute) counts as a marginal zero frequency.
inline constexpr double kStabilityTol = 1e-9;

struct FrequencySet {
    std::array<std::complex<double>, 3> omega_sq;  // roots in omega^2, sorted by real part
    std::array<std::complex<double>, 3> omega;     // principal square roots
    Stability classification = Stability::Stable;
    int critical_root = -1;  // index of the root that decided the label
    double margin = 0;       // distance of that root from the stability boundary
};

/// Band of rotation speeds with unstable center-of-mass motion. Degenerate
/// means the biquadratic free term has a double root (symmetric trap spun
/// about its symmetry axis): no instability region.
struct StabilityWindow {
    double lo = 0;
    double hi = 0;
    bool degenerate = false;

    bool has_instability() const { return !degenerate && hi > lo; }
};

struct OmegaPm {
    double plus_sq = 0;   // signed omega_+^2
    double minus_sq = 0;  // signed omega_-^2
    bool plus_imaginary = false;
    bool minus_imaginary = false;
    std::complex<double> plus;   // principal sqrt of plus_sq
    std::complex<double> minus;  // principal sqrt of minus_sq
};

/// Both algebraic forms of the discriminant of the biquadratic free term;
/// they agree identically and are nonnegative for positive traps.
struct Discriminant {
    double invariant_form = 0;  // from the six invariants
    double principal_form = 0;  // principal-frame rearrangement (manifestly >= 0)
};

CharPoly build_charpoly(const trap::Invariants& inv);

/// Roots via the companion-matrix eigensolve, Newton-polished. Repeated
/// roots come back with multiplicity.
FrequencySet solve_charpoly(const CharPoly& p);

/// Newton refinement of a cubic root with compensated (double-double)
/// polynomial evaluation; keeps full double accuracy even near close root
/// pairs, where plain evaluation loses half the digits.
std::complex<double> polish_cubic_root(const CharPoly& p, std::complex<double> w);

/// Closed-form perpendicular frequencies for rotation about the z principal
/// axis. Squared frequencies are returned signed; a negative value flags an
/// imaginary (unstable) frequency.
OmegaPm omega_pm(double a_x, double a_y, double Omega);

/// Requires a defined rotation axis in inv.
Discriminant discriminant(const trap::Invariants& inv);

StabilityWindow instability_window(const trap::TrapSpec& trap, const Eigen::Vector3d& axis);

}  // namespace comtrap::spectral
