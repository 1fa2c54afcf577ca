#include "permuton/skew.hpp"

#include "permuton/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace permuton {

namespace {

void require_corr(double corr) {
    if (!(corr > -1.0 && corr < 1.0)) throw InputError("correlation must lie in (-1, 1)");
}

void require_q(double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw InputError("q must lie in [0, 1]");
}

/// Unit vector uniform on S^3.
std::array<double, 4> uniform_s3(Philox4x32& rng, std::normal_distribution<double>& normal) {
    while (true) {
        std::array<double, 4> w{normal(rng), normal(rng), normal(rng), normal(rng)};
        const double norm = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2] + w[3] * w[3]);
        if (norm > 1e-12) {
            for (double& c : w) c /= norm;
            return w;
        }
    }
}

/// Brownian motion on S^3 (generator Laplacian / 2) for time `duration`, as a
/// geodesic random walk with substeps of at most `substep`.
void spherical_bm(std::array<double, 4>& w, double duration, double substep, Philox4x32& rng,
                  std::normal_distribution<double>& normal) {
    // Spectral gap of Laplacian/2 on S^3 is 3/2; after 20 time units the
    // law is uniform to ~1e-13.
    if (duration > 20.0) {
        w = uniform_s3(rng, normal);
        return;
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(duration / substep)));
    const double sd = std::sqrt(duration / steps);
    for (int s = 0; s < steps; ++s) {
        std::array<double, 4> v{normal(rng), normal(rng), normal(rng), normal(rng)};
        const double radial = v[0] * w[0] + v[1] * w[1] + v[2] * w[2] + v[3] * w[3];
        double len2 = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            v[i] = sd * (v[i] - radial * w[i]);
            len2 += v[i] * v[i];
        }
        const double len = std::sqrt(len2);
        if (len == 0.0) continue;
        const double c = std::cos(len), sn = std::sin(len) / len;
        double norm2 = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            w[i] = c * w[i] + sn * v[i];
            norm2 += w[i] * w[i];
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& x : w) x *= inv;
    }
}

/// Brownian excursion in the cone of angle alpha from the apex back to the
/// apex in unit time, in decorrelated coordinates, mapped to (X, Y).
///
/// Skew-product: the h-transform with h = r^nu sin(nu theta), nu = pi/alpha,
/// has radial part a Bessel process of dimension 2 + 2 nu, here a bridge from
/// 0 to 0 sampled exactly through noncentral chi-square transitions of its
/// square. The angle psi = nu theta runs on the clock nu^2 int dt / R^2 as a
/// diffusion with drift cot(psi), which is the colatitude of Brownian motion
/// on S^3.
Excursion2D skew_product_excursion(double corr, int n, Philox4x32& rng, double substep) {
    const double alpha = quadrant_cone_angle(corr);
    const double nu = std::numbers::pi / alpha;
    const double dim = 2.0 + 2.0 * nu;
    const double s = std::sqrt(1.0 - corr * corr);
    const double beta = std::atan2(-corr, s);  // direction of the ray Y = 0
    const double h = 1.0 / n;

    std::normal_distribution<double> normal;
    std::vector<double> radius2(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 0; k + 1 < n; ++k) {
        const double remaining = 1.0 - static_cast<double>(k + 1) / n;
        const double c = h * remaining / (h + remaining);
        const double lambda = radius2[static_cast<std::size_t>(k)] * c / (h * h);
        long extra = 0;
        if (lambda > 0.0) extra = std::poisson_distribution<long>(0.5 * lambda)(rng);
        std::gamma_distribution<double> gamma(0.5 * dim + static_cast<double>(extra), 1.0);
        radius2[static_cast<std::size_t>(k) + 1] = 2.0 * c * gamma(rng);
    }

    Excursion2D exc;
    exc.n_steps = n;
    exc.corr = corr;
    exc.xs.assign(static_cast<std::size_t>(n) + 1, 0.0);
    exc.ys.assign(static_cast<std::size_t>(n) + 1, 0.0);

    std::array<double, 4> w = uniform_s3(rng, normal);
    for (int k = 1; k < n; ++k) {
        const double r_k = std::sqrt(radius2[static_cast<std::size_t>(k)]);
        if (k > 1) {
            const double r_prev = std::sqrt(radius2[static_cast<std::size_t>(k) - 1]);
            const double clock = r_prev * r_k > 0.0 ? nu * nu * h / (r_prev * r_k) : 1e300;
            spherical_bm(w, clock, substep, rng, normal);
        }
        const double psi = std::acos(std::clamp(w[0], -1.0, 1.0));
        const double angle = beta + psi / nu;
        const double u = r_k * std::cos(angle);
        const double v = r_k * std::sin(angle);
        exc.xs[static_cast<std::size_t>(k)] = std::max(0.0, u);
        exc.ys[static_cast<std::size_t>(k)] = std::max(0.0, corr * u + s * v);
    }
    return exc;
}

Excursion2D rejection_excursion(double corr, int n, Philox4x32& rng, std::uint64_t max_attempts) {
    for (std::uint64_t attempt = 0; attempt < max_attempts; ++attempt) {
        Excursion2D walk = sample_correlated_walk(corr, n, rng);
        const double x_end = walk.xs.back();
        const double y_end = walk.ys.back();
        bool inside = true;
        for (int i = 0; i <= n && inside; ++i) {
            const double frac = static_cast<double>(i) / n;
            double& x = walk.xs[static_cast<std::size_t>(i)];
            double& y = walk.ys[static_cast<std::size_t>(i)];
            x -= frac * x_end;
            y -= frac * y_end;
            if (i == n) x = y = 0.0;
            inside = x >= 0.0 && y >= 0.0;
        }
        if (inside) return walk;
    }
    throw CapabilityError("quadrant bridge rejection accepted 0 of " + std::to_string(max_attempts) +
                          " attempts (measured acceptance rate 0) at n_steps=" + std::to_string(n) +
                          "; use the skew_product method or fewer steps");
}

}  // namespace

double quadrant_cone_angle(double corr) {
    require_corr(corr);
    return std::acos(-corr);
}

Excursion2D sample_correlated_walk(double corr, int n_steps, Philox4x32& rng) {
    require_corr(corr);
    if (n_steps < 1) throw InputError("walk needs n_steps >= 1");
    std::normal_distribution<double> normal;
    const double sd = std::sqrt(1.0 / n_steps);
    const double s = std::sqrt(1.0 - corr * corr);
    Excursion2D walk;
    walk.n_steps = n_steps;
    walk.corr = corr;
    walk.xs.assign(static_cast<std::size_t>(n_steps) + 1, 0.0);
    walk.ys.assign(static_cast<std::size_t>(n_steps) + 1, 0.0);
    for (std::size_t i = 1; i <= static_cast<std::size_t>(n_steps); ++i) {
        const double a = normal(rng);
        const double b = normal(rng);
        walk.xs[i] = walk.xs[i - 1] + sd * a;
        walk.ys[i] = walk.ys[i - 1] + sd * (corr * a + s * b);
    }
    return walk;
}

Excursion2D sample_quadrant_excursion(double corr, int n_steps, Philox4x32& rng, const ExcursionOptions& options) {
    require_corr(corr);
    if (n_steps < 100) throw InputError("quadrant excursion needs n_steps >= 100");
    if (!(options.angle_substep > 0.0)) throw InputError("angle substep must be positive");
    if (options.method == ExcursionMethod::rejection) return rejection_excursion(corr, n_steps, rng, options.max_attempts);
    return skew_product_excursion(corr, n_steps, rng, options.angle_substep);
}

Excursion2D sample_quadrant_excursion(double corr, int n_steps, std::uint64_t seed, const ExcursionOptions& options) {
    Philox4x32 rng = substream(seed, 0);
    return sample_quadrant_excursion(corr, n_steps, rng, options);
}

ZeroCoins::ZeroCoins(int n_steps, Philox4x32& rng) {
    if (n_steps < 1) throw InputError("coin stream needs n_steps >= 1");
    uniforms_.resize(static_cast<std::size_t>(n_steps));
    for (double& u : uniforms_) u = rng.uniform();
}

ZeroCoins::ZeroCoins(int n_steps, std::uint64_t seed) {
    Philox4x32 rng = substream(seed, 1);
    *this = ZeroCoins(n_steps, rng);
}

CoalescentWalk coalescent_walk(const Excursion2D& exc, double q, int start, const ZeroCoins& coins) {
    require_q(q);
    if (start < 0 || start > exc.n_steps) throw InputError("walk start must lie in 0..n_steps");
    if (coins.size() < exc.n_steps) throw InputError("coin stream shorter than the excursion");
    CoalescentWalk walk;
    walk.start = start;
    walk.q = q;
    walk.z.assign(static_cast<std::size_t>(exc.n_steps) + 1, 0.0);
    double z = 0.0;
    for (int k = start; k < exc.n_steps; ++k) {
        const auto i = static_cast<std::size_t>(k);
        z = coalescent_step(z, exc.xs[i + 1] - exc.xs[i], exc.ys[i + 1] - exc.ys[i], coins.positive(k, q));
        walk.z[i + 1] = z;
    }
    return walk;
}

double SkewPermutonEstimate::phi_hat(double t) const {
    const int i = std::min(m - 1, static_cast<int>(t * m));
    const auto& [ti, phi] = phi_samples[static_cast<std::size_t>(i)];
    return phi + (t - ti);
}

namespace {

PermutonGrid segments_to_grid(const std::vector<std::pair<double, double>>& phi, int m, int resolution) {
    PermutonGrid grid(resolution);
    const double width = 1.0 / m;
    for (const auto& [t, y0] : phi) {
        // Segment x in [t, t + width], y = y0 + (x - t); split where x or y
        // crosses a cell boundary. Mass equals the x-length of each piece.
        std::vector<double> cuts{t, t + width};
        for (int c = static_cast<int>(std::ceil(t * resolution)); c < resolution; ++c) {
            const double xb = static_cast<double>(c) / resolution;
            if (xb >= t + width) break;
            if (xb > t) cuts.push_back(xb);
        }
        for (int r = static_cast<int>(std::ceil(y0 * resolution)); r < resolution; ++r) {
            const double yb = static_cast<double>(r) / resolution;
            if (yb >= y0 + width) break;
            if (yb > y0) cuts.push_back(t + (yb - y0));
        }
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double len = cuts[k + 1] - cuts[k];
            if (len <= 0.0) continue;
            const double xm = 0.5 * (cuts[k] + cuts[k + 1]);
            const double ym = y0 + (xm - t);
            const int col = std::min(resolution - 1, static_cast<int>(xm * resolution));
            const int row = std::min(resolution - 1, static_cast<int>(ym * resolution));
            grid.at(row, col) += len;
        }
    }
    return grid;
}

}  // namespace

SkewPermutonEstimate phi_map(const Excursion2D& exc, double q, int m, const ZeroCoins& coins, int grid_resolution) {
    require_q(q);
    if (m < 2) throw InputError("phi map needs m >= 2 grid times");
    if (m > exc.n_steps) throw InputError("phi map needs m <= n_steps");
    if (coins.size() < exc.n_steps) throw InputError("coin stream shorter than the excursion");
    if (grid_resolution == 0) grid_resolution = m;
    const int n = exc.n_steps;
    const auto mm = static_cast<std::size_t>(m);

    // Excursion index of grid time i.
    std::vector<int> k_of(mm);
    for (int i = 0; i < m; ++i) k_of[static_cast<std::size_t>(i)] = static_cast<int>((static_cast<long long>(i) * n) / m);

    // counts[i] accumulates m * phi(t_i).
    std::vector<int> counts(mm, 0);
    std::vector<double> z(mm, 0.0);  // z[j] = Z^{(t_j)} at the current step
    int started = 0;
    int next_grid = 0;
    for (int k = 0; k <= n; ++k) {
        // Record signs at grid time `next_grid` when we reach its index.
        while (next_grid < m && k_of[static_cast<std::size_t>(next_grid)] == k) {
            const auto b = static_cast<std::size_t>(next_grid);
            for (std::size_t a = 0; a < b; ++a) {
                if (z[a] < 0.0) {
                    ++counts[b];  // x = t_a in the first set of phi(t_b)
                } else {
                    ++counts[a];  // x = t_b in the second set of phi(t_a)
                }
            }
            z[b] = 0.0;
            ++started;
            ++next_grid;
        }
        if (k == n) break;
        const auto i = static_cast<std::size_t>(k);
        const double dx = exc.xs[i + 1] - exc.xs[i];
        const double dy = exc.ys[i + 1] - exc.ys[i];
        const bool coin = coins.positive(k, q);
        for (std::size_t a = 0; a < static_cast<std::size_t>(started); ++a) {
            z[a] = coalescent_step(z[a], dx, dy, coin);
        }
    }
    // Cell j = i: the side on which Z^{(t_i)} leaves zero.
    for (int i = 0; i < m; ++i) {
        if (coins.positive(k_of[static_cast<std::size_t>(i)], q)) ++counts[static_cast<std::size_t>(i)];
    }

    SkewPermutonEstimate est;
    est.corr = exc.corr;
    est.q = q;
    est.n_steps = n;
    est.m = m;
    est.phi_samples.reserve(mm);
    for (int i = 0; i < m; ++i) {
        const int c = std::min(counts[static_cast<std::size_t>(i)], m - 1);
        est.phi_samples.emplace_back(static_cast<double>(i) / m, static_cast<double>(c) / m);
    }
    est.grid = segments_to_grid(est.phi_samples, m, grid_resolution);
    return est;
}

SkewPermutonEstimate phi_map(const Excursion2D& exc, double q, int m, std::uint64_t seed, int grid_resolution) {
    ZeroCoins coins(exc.n_steps, seed);
    SkewPermutonEstimate est = phi_map(exc, q, m, coins, grid_resolution);
    est.seed = seed;
    return est;
}

std::vector<SkewPermutonEstimate> simulate_skew_permuton(const SkewSimOptions& options) {
    require_corr(options.corr);
    require_q(options.q);
    if (options.replicas < 1) throw InputError("replica count must be >= 1");
    if (options.m < 2 || options.m > options.n_steps) throw InputError("need 2 <= m <= n_steps");
    if (options.n_steps < 100) throw InputError("quadrant excursion needs n_steps >= 100");
    std::vector<SkewPermutonEstimate> out(static_cast<std::size_t>(options.replicas));
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (int r = 0; r < options.replicas; ++r) {
        try {
            Philox4x32 exc_rng = substream(options.seed, 2 * static_cast<std::uint64_t>(r));
            Philox4x32 coin_rng = substream(options.seed, 2 * static_cast<std::uint64_t>(r) + 1);
            const Excursion2D exc = sample_quadrant_excursion(options.corr, options.n_steps, exc_rng, options.excursion);
            const ZeroCoins coins(options.n_steps, coin_rng);
            SkewPermutonEstimate est = phi_map(exc, options.q, options.m, coins, options.grid_resolution);
            est.seed = options.seed;
            out[static_cast<std::size_t>(r)] = std::move(est);
        } catch (...) {
#pragma omp critical(permuton_skew_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

double inversion_proportion(const SkewPermutonEstimate& est) {
    // Two independent uniform x's land in cells i < j. Distinct phi values
    // differ by at least 1/m, so the segments are fully ordered; equal phi
    // values give parallel segments that invert with probability 1/2; the
    // same cell never inverts.
    const auto m = static_cast<std::size_t>(est.m);
    double weighted = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double a = est.phi_samples[i].second;
            const double b = est.phi_samples[j].second;
            if (a > b) weighted += 1.0;
            else if (a == b) weighted += 0.5;
        }
    }
    return 2.0 * weighted / static_cast<double>(m * m);
}

namespace {

/// Relative order of points (sorted by x) as a permutation, or false on ties.
bool pattern_of(std::vector<Point2>& pts, std::vector<int>& out) {
    std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) { return a.x < b.x; });
    const std::size_t k = pts.size();
    out.assign(k, 1);
    for (std::size_t i = 0; i < k; ++i) {
        if (i > 0 && pts[i].x == pts[i - 1].x) return false;
        for (std::size_t j = 0; j < k; ++j) {
            if (j == i) continue;
            if (pts[j].y == pts[i].y) return false;
            if (pts[j].y < pts[i].y) ++out[i];
        }
    }
    return true;
}

template <typename DrawTuple>
OccEstimate frequency(const Permutation& pattern, std::size_t k_samples, std::uint64_t seed, DrawTuple&& draw) {
    if (k_samples < 100) throw InputError("occurrence estimation needs k_samples >= 100");
    const auto k = static_cast<std::size_t>(pattern.size());
    const std::vector<int> target(pattern.values().begin(), pattern.values().end());
    Philox4x32 rng = substream(seed, 0);
    std::vector<Point2> pts(k);
    std::vector<int> got;
    OccEstimate est;
    std::size_t hits = 0;
    for (std::size_t s = 0; s < k_samples; ++s) {
        while (true) {
            draw(rng, pts);
            if (pattern_of(pts, got)) break;
            ++est.resamples;
        }
        if (got == target) ++hits;
    }
    est.samples = k_samples;
    est.proportion = static_cast<double>(hits) / static_cast<double>(k_samples);
    est.stderr_ = std::sqrt(est.proportion * (1.0 - est.proportion) / static_cast<double>(k_samples));
    return est;
}

}  // namespace

OccEstimate estimate_occ(const PermutonGrid& grid, const Permutation& pattern, std::size_t k_samples,
                         std::uint64_t seed) {
    const int res = grid.resolution();
    std::vector<double> cdf(grid.cells().size());
    std::partial_sum(grid.cells().begin(), grid.cells().end(), cdf.begin());
    const double total = cdf.empty() ? 0.0 : cdf.back();
    if (!(total > 0.0)) throw InputError("cannot sample from a grid with zero mass");
    return frequency(pattern, k_samples, seed, [&](Philox4x32& rng, std::vector<Point2>& pts) {
        for (auto& p : pts) {
            const double u = rng.uniform() * total;
            auto idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
            idx = std::min(idx, cdf.size() - 1);
            const auto row = static_cast<int>(idx / static_cast<std::size_t>(res));
            const auto col = static_cast<int>(idx % static_cast<std::size_t>(res));
            p.x = (col + rng.uniform()) / res;
            p.y = (row + rng.uniform()) / res;
        }
    });
}

OccEstimate estimate_occ(std::span<const SkewPermutonEstimate> replicas, const Permutation& pattern,
                         std::size_t k_samples, std::uint64_t seed) {
    if (replicas.empty()) throw InputError("need at least one replica");
    const auto n_rep = static_cast<std::uint32_t>(replicas.size());
    return frequency(pattern, k_samples, seed, [&](Philox4x32& rng, std::vector<Point2>& pts) {
        const auto r = std::min<std::uint32_t>(n_rep - 1, static_cast<std::uint32_t>(rng.uniform() * n_rep));
        const SkewPermutonEstimate& est = replicas[r];
        for (auto& p : pts) {
            p.x = rng.uniform();
            p.y = est.phi_hat(p.x);
        }
    });
}

}  // namespace permuton
