#include "permuton/baxter.hpp"

#include "permuton/errors.hpp"
#include "permuton/random.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace permuton {

namespace {

/// Unbiased integer in [0, bound) (Lemire's multiply-and-reject).
std::uint32_t uniform_below(Philox4x32& rng, std::uint32_t bound) {
    std::uint64_t m = static_cast<std::uint64_t>(rng()) * bound;
    auto low = static_cast<std::uint32_t>(m);
    if (low < bound) {
        const std::uint32_t threshold = static_cast<std::uint32_t>(-bound) % bound;
        while (low < threshold) {
            m = static_cast<std::uint64_t>(rng()) * bound;
            low = static_cast<std::uint32_t>(m);
        }
    }
    return static_cast<std::uint32_t>(m >> 32);
}

void fisher_yates(std::vector<int>& v, Philox4x32& rng) {
    for (std::size_t i = v.size() - 1; i > 0; --i) {
        const auto j = uniform_below(rng, static_cast<std::uint32_t>(i + 1));
        std::swap(v[i], v[j]);
    }
}

}  // namespace

std::vector<Permutation> enumerate_baxter(int n) {
    if (n < 1 || n > kMaxEnumerateBaxter) {
        throw CapabilityError("exhaustive Baxter enumeration supports 1 <= n <= " +
                              std::to_string(kMaxEnumerateBaxter));
    }
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 1);
    std::vector<Permutation> out;
    do {
        Permutation p(v);
        if (is_baxter(p)) out.push_back(std::move(p));
    } while (std::next_permutation(v.begin(), v.end()));
    return out;
}

SampleBatch sample_baxter(int n, std::size_t count, std::uint64_t seed, int streams) {
    if (n < 1) throw InputError("permutation size must be >= 1");
    if (n > kMaxRejectionBaxter) {
        throw CapabilityError("rejection sampling of Baxter permutations is capped at n <= " +
                              std::to_string(kMaxRejectionBaxter));
    }
    if (streams < 1) throw InputError("stream count must be >= 1");

    const auto n_streams = static_cast<std::size_t>(streams);
    std::vector<std::vector<Permutation>> per_stream(n_streams);
    std::vector<std::uint64_t> attempts(n_streams, 0);

#pragma omp parallel for schedule(dynamic, 1)
    for (int s = 0; s < streams; ++s) {
        const auto si = static_cast<std::size_t>(s);
        const std::size_t quota = count / n_streams + (si < count % n_streams ? 1 : 0);
        Philox4x32 rng = substream(seed, si);
        std::vector<int> v(static_cast<std::size_t>(n));
        auto& out = per_stream[si];
        out.reserve(quota);
        while (out.size() < quota) {
            std::iota(v.begin(), v.end(), 1);
            fisher_yates(v, rng);
            ++attempts[si];
            Permutation p(v);
            if (is_baxter(p)) out.push_back(std::move(p));
        }
    }

    SampleBatch batch;
    batch.n = n;
    batch.seed = seed;
    batch.method = SampleMethod::rejection;
    batch.permutations.reserve(count);
    for (std::size_t s = 0; s < n_streams; ++s) {
        batch.attempts += attempts[s];
        for (auto& p : per_stream[s]) batch.permutations.push_back(std::move(p));
    }
    return batch;
}

PermutonGrid empirical_intensity(const std::vector<Permutation>& perms, int resolution) {
    if (perms.empty()) throw InputError("empirical intensity needs a nonempty batch");
    PermutonGrid acc(resolution);
    for (const auto& p : perms) {
        const PermutonGrid g = PermutonGrid::of_permutation(p, resolution);
        for (int r = 0; r < resolution; ++r) {
            for (int c = 0; c < resolution; ++c) acc.at(r, c) += g.at(r, c);
        }
    }
    const double inv = 1.0 / static_cast<double>(perms.size());
    for (int r = 0; r < resolution; ++r) {
        for (int c = 0; c < resolution; ++c) acc.at(r, c) *= inv;
    }
    return acc;
}

PermutonGrid empirical_intensity(const SampleBatch& batch, int resolution) {
    return empirical_intensity(batch.permutations, resolution);
}

}  // namespace permuton
