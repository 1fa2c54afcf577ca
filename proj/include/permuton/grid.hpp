#pragma once

#include "permuton/perm.hpp"

#include <vector>

namespace permuton {

/// R x R nonnegative cell masses on [0,1]^2. Row index is the y bin, column
/// index the x bin; storage is row-major. Cell (row, col) covers
/// [col/R, (col+1)/R] x [row/R, (row+1)/R].
class PermutonGrid {
public:
    PermutonGrid() = default;
    explicit PermutonGrid(int resolution);
    PermutonGrid(int resolution, std::vector<double> cells);

    int resolution() const noexcept { return resolution_; }
    double& at(int row, int col) { return cells_[index(row, col)]; }
    double at(int row, int col) const { return cells_[index(row, col)]; }
    const std::vector<double>& cells() const noexcept { return cells_; }

    double total() const;
    /// Sum over x of row `row` (a y bin).
    double row_sum(int row) const;
    double col_sum(int col) const;

    /// Rescale to unit total mass. Throws InputError on a zero grid.
    void normalize();

    /// Sum of blocks of `factor` x `factor` cells. Resolution must divide.
    PermutonGrid coarsen(int factor) const;

    /// Cell masses of mu_sigma.
    static PermutonGrid of_permutation(const Permutation& sigma, int resolution);

private:
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(resolution_) + static_cast<std::size_t>(col);
    }

    int resolution_ = 0;
    std::vector<double> cells_;
};

/// Half the L1 distance between two grids of equal resolution.
double total_variation(const PermutonGrid& a, const PermutonGrid& b);

}  // namespace permuton
