#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace comtrap::grid {

/// Uniform 1D or 2D grid centred on the origin: per-axis half-width
/// `extent` and `points` samples (power of two, >= 64), spacing 2L/N.
struct GridSpec {
    int dim = 1;
    double extent = 0;
    int points = 0;

    double spacing() const { return 2.0 * extent / points; }
    std::size_t size() const {
        return dim == 1 ? static_cast<std::size_t>(points)
                        : static_cast<std::size_t>(points) * points;
    }
    double coord(int i) const { return -extent + spacing() * i; }

    void validate() const;  // throws ValidationError
};

/// Complex field over a grid. Row-major for 2D: index = ix * N + iy.
struct GridWavefunction {
    GridSpec grid;
    std::vector<std::complex<double>> psi;
    double t = 0;

    double norm() const;          // integral of |psi|^2
    double peak_density() const;  // max |psi|^2
    /// Largest |psi|^2 within `band` cells of any boundary, as a fraction
    /// of the peak density.
    double boundary_fraction(int band) const;
};

double l2_distance(const GridWavefunction& a, const GridWavefunction& b);

}  // namespace comtrap::grid
