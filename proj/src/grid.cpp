#include "permuton/grid.hpp"

#include "permuton/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace permuton {

PermutonGrid::PermutonGrid(int resolution) : PermutonGrid(resolution, {}) {}

PermutonGrid::PermutonGrid(int resolution, std::vector<double> cells)
    : resolution_(resolution), cells_(std::move(cells)) {
    if (resolution < 1) throw InputError("grid resolution must be >= 1");
    const auto n = static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution);
    if (cells_.empty()) cells_.assign(n, 0.0);
    if (cells_.size() != n) throw InputError("grid cell count does not match resolution");
    for (double c : cells_) {
        if (!(c >= 0.0) || !std::isfinite(c)) throw InputError("grid masses must be finite and nonnegative");
    }
}

double PermutonGrid::total() const { return std::accumulate(cells_.begin(), cells_.end(), 0.0); }

double PermutonGrid::row_sum(int row) const {
    double s = 0.0;
    for (int c = 0; c < resolution_; ++c) s += at(row, c);
    return s;
}

double PermutonGrid::col_sum(int col) const {
    double s = 0.0;
    for (int r = 0; r < resolution_; ++r) s += at(r, col);
    return s;
}

void PermutonGrid::normalize() {
    const double t = total();
    if (!(t > 0.0)) throw InputError("cannot normalize a grid with zero mass");
    for (double& c : cells_) c /= t;
}

PermutonGrid PermutonGrid::coarsen(int factor) const {
    if (factor < 1 || resolution_ % factor != 0) throw InputError("coarsening factor must divide the resolution");
    PermutonGrid out(resolution_ / factor);
    for (int r = 0; r < resolution_; ++r) {
        for (int c = 0; c < resolution_; ++c) out.at(r / factor, c / factor) += at(r, c);
    }
    return out;
}

PermutonGrid PermutonGrid::of_permutation(const Permutation& sigma, int resolution) {
    // Each diagram square [(i-1)/n, i/n] x [(s-1)/n, s/n] carries mass 1/n;
    // spread it over the grid cells it overlaps.
    PermutonGrid g(resolution);
    const int n = sigma.size();
    const double cell = 1.0 / resolution;
    for (int i = 1; i <= n; ++i) {
        const double x1 = static_cast<double>(i - 1) / n, x2 = static_cast<double>(i) / n;
        const double y1 = static_cast<double>(sigma(i) - 1) / n, y2 = static_cast<double>(sigma(i)) / n;
        const int c_lo = std::min(resolution - 1, static_cast<int>(x1 * resolution));
        const int c_hi = std::min(resolution - 1, static_cast<int>(std::ceil(x2 * resolution)) - 1);
        const int r_lo = std::min(resolution - 1, static_cast<int>(y1 * resolution));
        const int r_hi = std::min(resolution - 1, static_cast<int>(std::ceil(y2 * resolution)) - 1);
        for (int r = r_lo; r <= r_hi; ++r) {
            const double wy = std::max(0.0, std::min(y2, (r + 1) * cell) - std::max(y1, r * cell));
            if (wy == 0.0) continue;
            for (int c = c_lo; c <= c_hi; ++c) {
                const double wx = std::max(0.0, std::min(x2, (c + 1) * cell) - std::max(x1, c * cell));
                g.at(r, c) += n * wx * wy;
            }
        }
    }
    return g;
}

double total_variation(const PermutonGrid& a, const PermutonGrid& b) {
    if (a.resolution() != b.resolution()) throw InputError("total variation needs grids of equal resolution");
    double s = 0.0;
    for (std::size_t i = 0; i < a.cells().size(); ++i) s += std::abs(a.cells()[i] - b.cells()[i]);
    return 0.5 * s;
}

}  // namespace permuton
