#include "permuton/oracles.hpp"

#include "permuton/errors.hpp"
#include "permuton/random.hpp"

#include <boost/random/sobol.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace permuton::oracle {

namespace {

// The kernel exactly as written, without the rearrangement used in the main
// evaluator.
double rho_literal(double t, double x, double r) {
    const double a = (1.5 * r * x / t - 1.0) * std::exp(-(r * r + x * x - r * x) / (2.0 * t));
    const double b = std::exp(-(x + r) * (x + r) / (2.0 * t));
    return (a + b) / (t * t);
}

}  // namespace

Estimate qmc_baxter_g(const std::array<double, 4>& a, std::uint64_t points, std::uint64_t seed, int shifts) {
    for (double ai : a) {
        if (!(ai > 0.0)) throw InputError("qmc oracle requires all a_i > 0");
    }
    if (shifts < 2 || points < static_cast<std::uint64_t>(shifts)) throw InputError("qmc oracle needs >= 2 shifts");
    // l_i sits in the kernels with a_{i-1} and a_i.
    std::array<double, 4> sigma{};
    for (std::size_t i = 0; i < 4; ++i) sigma[i] = 0.7 * std::sqrt(std::max(a[(i + 3) % 4], a[i]));

    const std::uint64_t per_shift = points / static_cast<std::uint64_t>(shifts);
    Philox4x32 rng = substream(seed, 0);
    std::vector<double> means;
    for (int s = 0; s < shifts; ++s) {
        std::array<double, 4> shift{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
        boost::random::sobol qrng(4);
        const double scale = 1.0 / (static_cast<double>(qrng.max()) - static_cast<double>(qrng.min()) + 1.0);
        double sum = 0.0;
        for (std::uint64_t k = 0; k < per_shift; ++k) {
            std::array<double, 4> ell{};
            double weight = 1.0;
            for (std::size_t i = 0; i < 4; ++i) {
                double u = static_cast<double>(qrng() - qrng.min()) * scale + shift[i];
                if (u >= 1.0) u -= 1.0;
                ell[i] = -sigma[i] * std::log1p(-u);
                weight *= sigma[i] * std::exp(ell[i] / sigma[i]);
            }
            const double f = rho_literal(a[0], ell[0], ell[1]) * rho_literal(a[1], ell[1], ell[2]) *
                             rho_literal(a[2], ell[2], ell[3]) * rho_literal(a[3], ell[3], ell[0]);
            if (f != 0.0) sum += f * weight;
        }
        means.push_back(sum / static_cast<double>(per_shift));
    }
    const double mean = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(shifts);
    double var = 0.0;
    for (double m : means) var += (m - mean) * (m - mean);
    var /= static_cast<double>(shifts - 1);
    return {mean, std::sqrt(var / static_cast<double>(shifts)), true};
}

bool naive_is_baxter(const Permutation& s) {
    const int n = s.size();
    for (int i = 1; i <= n; ++i) {
        for (int j = i + 1; j + 1 <= n; ++j) {
            for (int k = j + 2; k <= n; ++k) {
                // 2-41-3
                if (s(j + 1) < s(i) && s(i) < s(k) && s(k) < s(j)) return false;
                // 3-14-2
                if (s(j) < s(k) && s(k) < s(i) && s(i) < s(j + 1)) return false;
            }
        }
    }
    return true;
}

std::uint64_t brute_count_pattern(const Permutation& pattern, const Permutation& sigma) {
    const int k = pattern.size(), n = sigma.size();
    if (k > n) return 0;
    std::vector<int> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), 1);
    std::uint64_t count = 0;
    while (true) {
        if (induced_pattern(sigma, idx) == pattern) ++count;
        // Next k-subset in lexicographic order.
        int pos = k - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos + 1) --pos;
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
        for (int q = pos + 1; q < k; ++q) idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q) - 1] + 1;
    }
    return count;
}

std::vector<Permutation> brute_baxter(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 1);
    std::vector<Permutation> out;
    do {
        Permutation p(v);
        if (naive_is_baxter(p)) out.push_back(std::move(p));
    } while (std::next_permutation(v.begin(), v.end()));
    return out;
}

JointHistogram analytic_histogram(ConePoint start, std::uint64_t n_paths, std::vector<double> t_edges,
                                  std::vector<double> r_edges, std::uint64_t seed) {
    JointHistogram hist;
    hist.t_edges = std::move(t_edges);
    hist.r_edges = std::move(r_edges);
    hist.n_paths = n_paths;
    hist.start = start;
    std::vector<double> probs;
    for (std::size_t ti = 0; ti < hist.t_bins(); ++ti) {
        for (std::size_t ri = 0; ri < hist.r_bins(); ++ri) {
            probs.push_back(joint_bin_probability(start, hist.t_edges[ti], hist.t_edges[ti + 1], hist.r_edges[ri],
                                                  hist.r_edges[ri + 1]));
        }
    }
    const double inside = std::accumulate(probs.begin(), probs.end(), 0.0);
    probs.push_back(std::max(0.0, 1.0 - inside));
    // Sequential binomial draws give an exact multinomial sample.
    Philox4x32 rng = substream(seed, 0);
    hist.counts.assign(probs.size() - 1, 0);
    std::uint64_t left = n_paths;
    double mass_left = 1.0;
    for (std::size_t k = 0; k + 1 < probs.size() && left > 0; ++k) {
        const double p = std::clamp(probs[k] / mass_left, 0.0, 1.0);
        const auto c = std::binomial_distribution<std::uint64_t>(left, p)(rng);
        hist.counts[k] = c;
        left -= c;
        mass_left -= probs[k];
        if (mass_left <= 0.0) break;
    }
    return hist;
}

}  // namespace permuton::oracle
