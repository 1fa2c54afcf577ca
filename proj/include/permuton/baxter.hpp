#pragma once

#include "permuton/grid.hpp"
#include "permuton/perm.hpp"

#include <cstdint>
#include <vector>

namespace permuton {

inline constexpr int kMaxEnumerateBaxter = 10;
inline constexpr int kMaxRejectionBaxter = 16;
inline constexpr int kDefaultSamplerStreams = 16;

enum class SampleMethod { enumeration, rejection };

/// Uniform Baxter permutations of a common size.
struct SampleBatch {
    int n = 0;
    std::vector<Permutation> permutations;
    std::uint64_t seed = 0;
    SampleMethod method = SampleMethod::rejection;
    /// Uniform S_n draws consumed; permutations.size() / attempts is the
    /// measured acceptance rate.
    std::uint64_t attempts = 0;

    double acceptance_rate() const {
        return attempts == 0 ? 0.0 : static_cast<double>(permutations.size()) / static_cast<double>(attempts);
    }
};

/// All Baxter permutations of size n in lexicographic order, 1 <= n <= 10.
std::vector<Permutation> enumerate_baxter(int n);

/// `count` independent uniform Baxter permutations of size n <= 16, by
/// rejection from uniform S_n. Work is split over `streams` Philox substreams
/// of `seed`; the result depends only on (n, count, seed, streams).
SampleBatch sample_baxter(int n, std::size_t count, std::uint64_t seed, int streams = kDefaultSamplerStreams);

/// Average over the batch of the cell masses of mu_sigma.
PermutonGrid empirical_intensity(const SampleBatch& batch, int resolution);
PermutonGrid empirical_intensity(const std::vector<Permutation>& perms, int resolution);

}  // namespace permuton
