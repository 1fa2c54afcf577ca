#pragma once

#include "permuton/grid.hpp"
#include "permuton/perm.hpp"
#include "permuton/random.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace permuton {

/// Discretized two-dimensional Brownian loop of correlation `corr` on [0,1]
/// that stays in the closed nonnegative quadrant and ends at the origin.
struct Excursion2D {
    int n_steps = 0;
    std::vector<double> xs;  ///< n_steps + 1 samples at times i / n_steps
    std::vector<double> ys;
    double corr = 0.0;
};

enum class ExcursionMethod {
    /// Exact squared-radius bridge plus angular diffusion (default).
    skew_product,
    /// Correlated Gaussian bridge conditioned by rejection; only feasible for
    /// small n_steps (acceptance decays like n^{-pi/alpha}).
    rejection,
};

struct ExcursionOptions {
    ExcursionMethod method = ExcursionMethod::skew_product;
    std::uint64_t max_attempts = 1'000'000;
    /// Largest clock increment of one angular substep (skew_product only).
    double angle_substep = 1e-3;
};

/// Opening angle alpha = arccos(-corr) of the image of the quadrant under
/// the decorrelating map (X, Y) -> (X, (Y - corr X) / sqrt(1 - corr^2)).
double quadrant_cone_angle(double corr);

Excursion2D sample_quadrant_excursion(double corr, int n_steps, Philox4x32& rng, const ExcursionOptions& options = {});
Excursion2D sample_quadrant_excursion(double corr, int n_steps, std::uint64_t seed,
                                      const ExcursionOptions& options = {});

/// Unconditioned walk with n_steps bivariate normal increments of variance
/// 1/n_steps and correlation corr, started at the origin.
Excursion2D sample_correlated_walk(double corr, int n_steps, Philox4x32& rng);

/// Side coins at zero contacts, one uniform per excursion step and shared by
/// every walk of a replica. At step k the positive side is taken iff
/// uniform(k) < q, so coins are monotone in q for fixed uniforms.
class ZeroCoins {
public:
    ZeroCoins(int n_steps, Philox4x32& rng);
    ZeroCoins(int n_steps, std::uint64_t seed);
    bool positive(int step, double q) const { return uniforms_[static_cast<std::size_t>(step)] < q; }
    int size() const noexcept { return static_cast<int>(uniforms_.size()); }

private:
    std::vector<double> uniforms_;
};

/// Solution Z^{(u)} of the skew coalescent-walk recursion driven by `exc`.
struct CoalescentWalk {
    int start = 0;
    double q = 0.5;
    /// z[t] for t = 0..n_steps; zero for t <= start.
    std::vector<double> z;
};

/// One step of the discrete skew coalescent walk: z > 0 follows +dY, z < 0
/// follows -dX; on touching or crossing zero (or from zero) the walk restarts
/// at +|dY| if the shared coin says positive, else at -|dX|.
inline double coalescent_step(double z, double dx, double dy, bool coin_positive) {
    if (z > 0.0) {
        const double next = z + dy;
        if (next > 0.0) return next;
    } else if (z < 0.0) {
        const double next = z - dx;
        if (next < 0.0) return next;
    }
    return coin_positive ? std::abs(dy) : -std::abs(dx);
}

CoalescentWalk coalescent_walk(const Excursion2D& exc, double q, int start, const ZeroCoins& coins);

/// A realization of phi_Z on an m-point time grid, with its permuton.
///
/// The measure is the push-forward of Lebesgue measure under the map that is
/// phi_i + (t - t_i) on [t_i, t_i + 1/m), i.e. unit-slope segments through
/// the points (t_i, phi_i). For q = 0 this is exactly the identity permuton.
struct SkewPermutonEstimate {
    PermutonGrid grid;
    std::vector<std::pair<double, double>> phi_samples;  ///< (t_i, phi_i), t_i = i/m
    double corr = 0.0;
    double q = 0.5;
    int n_steps = 0;
    int m = 0;
    std::uint64_t seed = 0;

    /// The y-coordinate of the unit-slope segment at x = t.
    double phi_hat(double t) const;
};

/// phi_Z on the grid t_i = i/m, i = 0..m-1. Cell i counts x in [t_j, t_{j+1})
/// by Z^{(t_j)}(t_i) < 0 for j < i, by Z^{(t_i)}(t_j) >= 0 for j > i, and by
/// the side Z^{(t_i)} leaves zero on for j = i. `grid_resolution` 0 means m.
SkewPermutonEstimate phi_map(const Excursion2D& exc, double q, int m, const ZeroCoins& coins,
                             int grid_resolution = 0);
SkewPermutonEstimate phi_map(const Excursion2D& exc, double q, int m, std::uint64_t seed, int grid_resolution = 0);

struct SkewSimOptions {
    double corr = -0.5;
    double q = 0.5;
    int n_steps = 10240;
    int m = 512;
    int replicas = 1;
    std::uint64_t seed = 0;
    int grid_resolution = 0;
    ExcursionOptions excursion;
};

/// Independent replicas, each with its own excursion and coin substreams
/// (replica r uses substreams 2r and 2r + 1 of the seed). Parallel over
/// replicas; output is independent of the thread count.
std::vector<SkewPermutonEstimate> simulate_skew_permuton(const SkewSimOptions& options);

/// Exact occ~(21) of the unit-slope-segment measure of an estimate.
double inversion_proportion(const SkewPermutonEstimate& est);

struct OccEstimate {
    double proportion = 0.0;
    double stderr_ = 0.0;
    std::size_t samples = 0;
    std::size_t resamples = 0;  ///< tuples redrawn because of coordinate ties
};

/// Frequency of `pattern` among k_samples tuples of iid points from the grid
/// measure (cell by mass, uniform within the cell).
OccEstimate estimate_occ(const PermutonGrid& grid, const Permutation& pattern, std::size_t k_samples,
                         std::uint64_t seed);

/// Same, pooling replicas: each tuple first picks a replica uniformly, then
/// draws all of its points from that replica's measure.
OccEstimate estimate_occ(std::span<const SkewPermutonEstimate> replicas, const Permutation& pattern,
                         std::size_t k_samples, std::uint64_t seed);

}  // namespace permuton
