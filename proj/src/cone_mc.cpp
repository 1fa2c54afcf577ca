#include "permuton/cone_mc.hpp"

#include "permuton/densities.hpp"
#include "permuton/errors.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace permuton {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

// Signed distances to the two boundary lines, positive inside.
double dist_lower(double, double y) { return y; }
double dist_upper(double x, double y) { return 0.5 * (kSqrt3 * x - y); }

void require_start(ConePoint start, double step) {
    if (!in_open_cone(start.x, start.y)) throw InputError("start must lie strictly inside the pi/3 cone");
    if (!(step > 0.0 && step <= 1e-2)) throw InputError("step must lie in (0, 1e-2]");
}

void require_edges(const std::vector<double>& edges, const char* name) {
    if (edges.size() < 2) throw InputError(std::string(name) + " needs at least two edges");
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (!(edges[i] >= 0.0 && edges[i + 1] > edges[i])) throw InputError(std::string(name) + " must be increasing and >= 0");
    }
}

ExitRecord finish(ConePoint start, ExitSide side, double tau, double px, double py) {
    ExitRecord rec;
    rec.start = start;
    rec.side = side;
    rec.tau = tau;
    // Distance along the ray; for the lower ray that is x, for the upper one
    // the projection onto (1/2, sqrt3/2).
    rec.exit_r = side == ExitSide::lower ? std::abs(px) : std::abs(0.5 * px + 0.5 * kSqrt3 * py);
    return rec;
}

}  // namespace

ExitRecord simulate_exit(ConePoint start, double step, Philox4x32& rng, const ExitOptions& options) {
    require_start(start, step);
    std::normal_distribution<double> normal(0.0, std::sqrt(step));
    double x = start.x, y = start.y, t = 0.0;
    double d_lo = dist_lower(x, y), d_up = dist_upper(x, y);
    while (t < options.max_time) {
        const double nx = x + normal(rng);
        const double ny = y + normal(rng);
        const double n_lo = dist_lower(nx, ny), n_up = dist_upper(nx, ny);
        if (n_lo <= 0.0 || n_up <= 0.0) {
            // Fraction of the segment at which each line is crossed.
            const double f_lo = n_lo <= 0.0 ? d_lo / (d_lo - n_lo) : 2.0;
            const double f_up = n_up <= 0.0 ? d_up / (d_up - n_up) : 2.0;
            const double f = std::min(f_lo, f_up);
            const ExitSide side = f_lo <= f_up ? ExitSide::lower : ExitSide::upper;
            return finish(start, side, t + f * step, x + f * (nx - x), y + f * (ny - y));
        }
        if (options.bridge_correction) {
            const double p_lo = std::exp(-2.0 * d_lo * n_lo / step);
            const double p_up = std::exp(-2.0 * d_up * n_up / step);
            // Skip the uniform draw when neither line is within reach.
            if (p_lo > 1e-12 || p_up > 1e-12) {
                const double u = rng.uniform();
                const double p_any = p_lo + p_up - p_lo * p_up;
                if (u < p_any) {
                    const ExitSide side = u < p_lo * (p_any / (p_lo + p_up)) ? ExitSide::lower : ExitSide::upper;
                    // Place the touch where the chord is closest to the line.
                    const double a = side == ExitSide::lower ? d_lo : d_up;
                    const double b = side == ExitSide::lower ? n_lo : n_up;
                    const double f = a / (a + b);
                    const double px = x + f * (nx - x), py = y + f * (ny - y);
                    double ex = px, ey = py;
                    if (side == ExitSide::lower) {
                        ey = 0.0;
                    } else {
                        const double along = 0.5 * px + 0.5 * kSqrt3 * py;
                        ex = 0.5 * along;
                        ey = 0.5 * kSqrt3 * along;
                    }
                    return finish(start, side, t + f * step, ex, ey);
                }
            }
        }
        x = nx;
        y = ny;
        d_lo = n_lo;
        d_up = n_up;
        t += step;
    }
    ExitRecord rec;
    rec.start = start;
    rec.tau = t;
    rec.side = ExitSide::censored;
    return rec;
}

ExitRecord simulate_exit(ConePoint start, double step, std::uint64_t seed, std::uint64_t path,
                         const ExitOptions& options) {
    Philox4x32 rng = substream(seed, path);
    return simulate_exit(start, step, rng, options);
}

ExitTally exit_tally(ConePoint start, double step, std::uint64_t n_paths, std::uint64_t seed,
                     const ExitOptions& options) {
    require_start(start, step);
    if (n_paths == 0) throw InputError("need at least one path");
    std::uint64_t upper = 0, lower = 0, censored = 0;
    double tau_sum = 0.0;
    const auto n = static_cast<long long>(n_paths);
#pragma omp parallel for schedule(dynamic, 256) reduction(+ : upper, lower, censored, tau_sum)
    for (long long i = 0; i < n; ++i) {
        const ExitRecord rec = simulate_exit(start, step, seed, static_cast<std::uint64_t>(i), options);
        switch (rec.side) {
            case ExitSide::upper: ++upper; tau_sum += rec.tau; break;
            case ExitSide::lower: ++lower; tau_sum += rec.tau; break;
            case ExitSide::censored: ++censored; break;
        }
    }
    ExitTally tally;
    tally.n_paths = n_paths;
    tally.upper = upper;
    tally.lower = lower;
    tally.censored = censored;
    const std::uint64_t exited = upper + lower;
    tally.mean_tau = exited == 0 ? 0.0 : tau_sum / static_cast<double>(exited);
    return tally;
}

std::uint64_t JointHistogram::total() const {
    std::uint64_t s = 0;
    for (std::uint64_t c : counts) s += c;
    return s;
}

JointHistogram mc_joint_histogram(ConePoint start, double step, std::uint64_t n_paths, std::vector<double> t_edges,
                                  std::vector<double> r_edges, std::uint64_t seed, const ExitOptions& options) {
    require_start(start, step);
    require_edges(t_edges, "t_edges");
    require_edges(r_edges, "r_edges");
    if (n_paths < 10'000) throw InputError("joint histogram needs n_paths >= 10^4");

    JointHistogram hist;
    hist.t_edges = std::move(t_edges);
    hist.r_edges = std::move(r_edges);
    hist.counts.assign(hist.t_bins() * hist.r_bins(), 0);
    hist.n_paths = n_paths;
    hist.start = start;
    hist.step = step;

    ExitOptions opts = options;
    opts.max_time = std::min(opts.max_time, hist.t_edges.back());
    const auto n = static_cast<long long>(n_paths);
#pragma omp parallel
    {
        std::vector<std::uint64_t> local(hist.counts.size(), 0);
#pragma omp for schedule(dynamic, 256) nowait
        for (long long i = 0; i < n; ++i) {
            const ExitRecord rec = simulate_exit(start, step, seed, static_cast<std::uint64_t>(i), opts);
            if (rec.side != ExitSide::upper) continue;
            const auto tb = std::upper_bound(hist.t_edges.begin(), hist.t_edges.end(), rec.tau) - hist.t_edges.begin();
            const auto rb = std::upper_bound(hist.r_edges.begin(), hist.r_edges.end(), rec.exit_r) - hist.r_edges.begin();
            if (tb < 1 || tb >= static_cast<long>(hist.t_edges.size())) continue;
            if (rb < 1 || rb >= static_cast<long>(hist.r_edges.size())) continue;
            ++local[static_cast<std::size_t>(tb - 1) * hist.r_bins() + static_cast<std::size_t>(rb - 1)];
        }
#pragma omp critical(permuton_histogram_merge)
        for (std::size_t k = 0; k < local.size(); ++k) hist.counts[k] += local[k];
    }
    return hist;
}

double joint_bin_probability(ConePoint start, double t_lo, double t_hi, double r_lo, double r_hi) {
    if (!in_open_cone(start.x, start.y)) throw InputError("start must lie strictly inside the pi/3 cone");
    if (!(t_hi > t_lo && t_lo >= 0.0 && r_hi > r_lo && r_lo >= 0.0)) throw InputError("bad bin bounds");
    const double x = start.x, y = start.y, z2 = x * x + y * y;
    // Each image term of p1 is c exp(-(|z|^2 + r^2 - b r) / 2t), Gaussian in r.
    const std::array<double, 3> c{0.5 * (kSqrt3 * x - y), -0.5 * (kSqrt3 * x + y), y};
    const std::array<double, 3> b{x + kSqrt3 * y, x - kSqrt3 * y, -2.0 * x};
    const auto erf_diff = [](double lo, double hi) {
        // erf(hi) - erf(lo) without cancellation in the tails
        if (lo > 0.0) return std::erfc(lo) - std::erfc(hi);
        if (hi < 0.0) return std::erfc(-hi) - std::erfc(-lo);
        return std::erf(hi) - std::erf(lo);
    };
    const auto over_r = [&](double t) {
        if (!(t > 0.0) || std::isinf(t)) return 0.0;
        const double s = std::sqrt(2.0 * t);
        double sum = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            const double m = 0.5 * b[k];
            sum += c[k] * std::exp(-(z2 - m * m) / (2.0 * t)) * erf_diff((r_lo - m) / s, (r_hi - m) / s);
        }
        // 0.5 sqrt(2 pi t) from the Gaussian, 1 / (2 pi t^2) from p1
        return sum * 0.5 * std::sqrt(2.0 * std::numbers::pi * t) / (2.0 * std::numbers::pi * t * t);
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(over_r, t_lo, t_hi, 20, 1e-11);
}

HistogramReport compare_histogram(const JointHistogram& hist, ConePoint density_start, double min_expected) {
    HistogramReport report;
    if (std::abs(hist.start.x - density_start.x) > 1e-12 || std::abs(hist.start.y - density_start.y) > 1e-12) {
        report.consistent = false;
        std::ostringstream msg;
        msg << "histogram start (" << hist.start.x << ", " << hist.start.y << ") differs from density start ("
            << density_start.x << ", " << density_start.y << ")";
        report.message = msg.str();
    }
    const double n = static_cast<double>(hist.n_paths);
    double observed_in = 0.0, expected_in = 0.0;
    double pooled_obs = 0.0, pooled_exp = 0.0;
    int categories = 0;
    const auto add = [&](double obs, double expct) {
        if (expct < 5.0) {
            pooled_obs += obs;
            pooled_exp += expct;
            return;
        }
        report.chi_square += (obs - expct) * (obs - expct) / expct;
        ++categories;
    };
    for (std::size_t ti = 0; ti < hist.t_bins(); ++ti) {
        for (std::size_t ri = 0; ri < hist.r_bins(); ++ri) {
            BinComparison bin{hist.t_edges[ti], hist.t_edges[ti + 1], hist.r_edges[ri], hist.r_edges[ri + 1],
                              hist.count(ti, ri), 0.0};
            bin.expected = n * joint_bin_probability(density_start, bin.t_lo, bin.t_hi, bin.r_lo, bin.r_hi);
            const double obs = static_cast<double>(bin.count);
            observed_in += obs;
            expected_in += bin.expected;
            add(obs, bin.expected);
            if (bin.expected >= min_expected) {
                ++report.well_populated;
                report.max_rel_dev = std::max(report.max_rel_dev, std::abs(obs - bin.expected) / bin.expected);
            }
            report.bins.push_back(bin);
        }
    }
    add(n - observed_in, std::max(0.0, n - expected_in));
    if (pooled_exp > 0.0) {
        if (pooled_exp >= 5.0 || categories == 0) {
            report.chi_square += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
            ++categories;
        } else {
            // Too small to stand alone; the statistic ignores it.
            report.message += report.message.empty() ? "" : "; ";
            report.message += "pooled tail with expected count < 5 dropped";
        }
    }
    report.dof = std::max(1, categories - 1);
    boost::math::chi_squared dist(report.dof);
    report.p_value = boost::math::cdf(boost::math::complement(dist, report.chi_square));
    return report;
}

std::vector<double> default_t_edges() { return {0.0, 0.15, 0.35, 0.8, 50.0}; }

std::vector<double> default_r_edges() { return {0.0, 0.9, 1.3, 1.75, 50.0}; }

}  // namespace permuton
