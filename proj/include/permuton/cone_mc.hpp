#pragma once

#include "permuton/random.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace permuton {

/// Point of the pi/3 cone {0 <= arg z <= pi/3}.
struct ConePoint {
    double x = 1.0;
    double y = 0.0;
};

enum class ExitSide { lower, upper, censored };

struct ExitRecord {
    double tau = 0.0;
    double exit_r = 0.0;
    ExitSide side = ExitSide::censored;
    ConePoint start;
};

struct ExitOptions {
    /// Paths still inside at this time are reported as censored.
    double max_time = std::numeric_limits<double>::infinity();
    /// Also test for crossings between grid points with the Brownian-bridge
    /// probability exp(-2 d0 d1 / step) for each boundary line.
    bool bridge_correction = true;
};

/// Euler path from `start` with N(0, step) coordinate increments until it
/// leaves the cone. The exit point is the intersection of the last segment
/// with the crossed ray. Throws InputError unless start is in the open cone
/// and step in (0, 1e-2].
ExitRecord simulate_exit(ConePoint start, double step, Philox4x32& rng, const ExitOptions& options = {});

/// Path `path` of a run seeded with `seed`; each path has its own substream.
ExitRecord simulate_exit(ConePoint start, double step, std::uint64_t seed, std::uint64_t path = 0,
                         const ExitOptions& options = {});

struct ExitTally {
    std::uint64_t n_paths = 0;
    std::uint64_t upper = 0;
    std::uint64_t lower = 0;
    std::uint64_t censored = 0;
    double mean_tau = 0.0;  ///< over exited paths

    double upper_fraction() const { return n_paths == 0 ? 0.0 : static_cast<double>(upper) / static_cast<double>(n_paths); }
};

/// Exit sides of n_paths independent paths (parallel, thread-count independent).
ExitTally exit_tally(ConePoint start, double step, std::uint64_t n_paths, std::uint64_t seed,
                     const ExitOptions& options = {});

/// Counts of (tau, exit_r) over paths leaving through the upper ray.
struct JointHistogram {
    std::vector<double> t_edges;
    std::vector<double> r_edges;
    /// Row-major, row = tau bin.
    std::vector<std::uint64_t> counts;
    std::uint64_t n_paths = 0;
    ExitSide side = ExitSide::upper;
    ConePoint start;
    double step = 0.0;

    std::size_t t_bins() const { return t_edges.size() - 1; }
    std::size_t r_bins() const { return r_edges.size() - 1; }
    std::uint64_t count(std::size_t ti, std::size_t ri) const { return counts[ti * r_bins() + ri]; }
    std::uint64_t total() const;
};

/// Paths are censored at t_edges.back(), since later exits fall in no bin.
JointHistogram mc_joint_histogram(ConePoint start, double step, std::uint64_t n_paths, std::vector<double> t_edges,
                                  std::vector<double> r_edges, std::uint64_t seed, const ExitOptions& options = {});

/// Integral of p1(start; t, r) over [t_lo, t_hi] x [r_lo, r_hi].
double joint_bin_probability(ConePoint start, double t_lo, double t_hi, double r_lo, double r_hi);

struct BinComparison {
    double t_lo, t_hi, r_lo, r_hi;
    std::uint64_t count;
    double expected;
};

struct HistogramReport {
    std::vector<BinComparison> bins;
    double chi_square = 0.0;
    int dof = 0;
    double p_value = 0.0;
    /// Largest |count - expected| / expected over bins with expected >= min_expected.
    double max_rel_dev = 0.0;
    int well_populated = 0;
    /// False when the density was evaluated for a different start point.
    bool consistent = true;
    std::string message;
};

/// Chi-square of the histogram against the p1 bin integrals for `density_start`.
/// The categories are the bins plus everything outside them (other side,
/// later exits); categories with expected count < 5 are pooled into one.
HistogramReport compare_histogram(const JointHistogram& hist, ConePoint density_start, double min_expected = 500.0);

/// Default binning used by the CLI and the checks.
std::vector<double> default_t_edges();
std::vector<double> default_r_edges();

}  // namespace permuton
