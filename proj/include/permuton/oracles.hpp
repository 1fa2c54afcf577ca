#pragma once

#include "permuton/cone_mc.hpp"
#include "permuton/perm.hpp"
#include "permuton/quadrature.hpp"

#include <array>
#include <cstdint>
#include <vector>

// Independent reference implementations used only to check the main code.
namespace permuton::oracle {

/// g(a) by randomly shifted Sobol points with exponential importance
/// sampling l_i = -sigma log(1 - u_i) on each axis. The error is the standard
/// error over `shifts` independent shifts.
Estimate qmc_baxter_g(const std::array<double, 4>& a, std::uint64_t points, std::uint64_t seed, int shifts = 16);

/// Definition check by four nested loops over i < j < j+1 < k.
bool naive_is_baxter(const Permutation& sigma);

/// Pattern count over all k-subsets via induced_pattern, no pruning.
std::uint64_t brute_count_pattern(const Permutation& pattern, const Permutation& sigma);

/// Baxter permutations of size n by scanning S_n with naive_is_baxter.
std::vector<Permutation> brute_baxter(int n);

/// Multinomial draw of n_paths over the histogram bins (plus the outside
/// category) with the p1 bin integrals as probabilities: a histogram that
/// follows the analytic law exactly.
JointHistogram analytic_histogram(ConePoint start, std::uint64_t n_paths, std::vector<double> t_edges,
                                  std::vector<double> r_edges, std::uint64_t seed);

}  // namespace permuton::oracle
