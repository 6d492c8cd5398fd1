#include "comtrap/grid.hpp"

#include <cmath>
#include <sstream>

#include "comtrap/errors.hpp"

namespace comtrap::grid {

void GridSpec::validate() const {
    if (dim != 1 && dim != 2) throw ValidationError("grid dim must be 1 or 2");
    if (!(extent > 0)) throw ValidationError("grid extent must be positive");
    if (points < 64 || (points & (points - 1)) != 0) {
        std::ostringstream msg;
        msg << "grid points must be a power of two >= 64, got " << points;
        throw ValidationError(msg.str());
    }
}

namespace {
double cell_volume(const GridSpec& g) {
    const double dx = g.spacing();
    return g.dim == 1 ? dx : dx * dx;
}
}  // namespace

double GridWavefunction::norm() const {
    double s = 0;
    for (const auto& v : psi) s += std::norm(v);
    return s * cell_volume(grid);
}

double GridWavefunction::peak_density() const {
    double m = 0;
    for (const auto& v : psi) m = std::max(m, std::norm(v));
    return m;
}

double GridWavefunction::boundary_fraction(int band) const {
    const int n = grid.points;
    double edge = 0;
    if (grid.dim == 1) {
        for (int i = 0; i < n; ++i)
            if (i < band || i >= n - band) edge = std::max(edge, std::norm(psi[i]));
    } else {
        for (int ix = 0; ix < n; ++ix) {
            const bool xedge = ix < band || ix >= n - band;
            for (int iy = 0; iy < n; ++iy) {
                if (xedge || iy < band || iy >= n - band)
                    edge = std::max(edge, std::norm(psi[static_cast<std::size_t>(ix) * n + iy]));
            }
        }
    }
    const double peak = peak_density();
    return peak > 0 ? edge / peak : 0.0;
}

double l2_distance(const GridWavefunction& a, const GridWavefunction& b) {
    if (a.grid.dim != b.grid.dim || a.grid.points != b.grid.points ||
        a.grid.extent != b.grid.extent)
        throw ValidationError("l2_distance requires identical grids");
    double s = 0;
    for (std::size_t i = 0; i < a.psi.size(); ++i) s += std::norm(a.psi[i] - b.psi[i]);
    return std::sqrt(s * cell_volume(a.grid));
}

}  // namespace comtrap::grid
