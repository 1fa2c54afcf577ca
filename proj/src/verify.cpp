#include "permuton/verify.hpp"

#include "permuton/baxter.hpp"
#include "permuton/cone_mc.hpp"
#include "permuton/densities.hpp"
#include "permuton/errors.hpp"
#include "permuton/oracles.hpp"
#include "permuton/perm.hpp"
#include "permuton/skew.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

namespace permuton::verify {

namespace {

// Pinned tolerances.
constexpr double kDurationNormTol = 1e-6;
constexpr double kJointVsExitRelTol = 1e-5;
constexpr double kExitMassTol = 1e-8;
constexpr double kSideSigmas = 3.0;
constexpr double kJointBinRelTol = 0.05;
constexpr double kJointMinExpected = 500.0;
constexpr double kMarginalTol = 0.01;
constexpr double kSymmetryErrMultiple = 3.0;
constexpr double kQmcRelTol = 0.02;
constexpr double kTvTol = 0.1;
constexpr double kBaxterInvTol = 0.01;
constexpr double kSkewInvTol = 0.02;
constexpr double kAntiDiagonalMin = 0.98;

struct Workload {
    int side_paths;
    double side_step;
    std::uint64_t joint_paths;
    double joint_step;
    int pb_resolution;
    std::uint64_t qmc_points;
    std::size_t baxter_samples;
    int skew_steps;
    int skew_m;
    int skew_replicas;
    int skew_replicas_second;
    std::size_t occ_tuples;
    int completeness_max_n;
};

Workload workload(Suite suite) {
    if (suite == Suite::full) return {100'000, 1e-4, 1'000'000, 1e-4, 50, 10'000'000, 5000, 10240, 512, 200, 50, 100'000, 9};
    return {20'000, 1e-3, 100'000, 1e-3, 16, 1'000'000, 5000, 2560, 128, 60, 20, 20'000, 7};
}

struct Context {
    Options options;
    Workload work;
    std::optional<DensityGrid> pb_grid;
    std::optional<SampleBatch> baxter;
    std::map<std::pair<double, double>, std::vector<SkewPermutonEstimate>> skew;

    std::uint64_t seed(std::uint64_t salt) const { return mix64(options.seed ^ mix64(salt)); }

    const DensityGrid& pb() {
        if (!pb_grid) pb_grid = baxter_density_grid(work.pb_resolution, QuadratureSpec{});
        return *pb_grid;
    }
    const SampleBatch& baxter_batch() {
        if (!baxter) baxter = sample_baxter(12, work.baxter_samples, seed(7));
        return *baxter;
    }
    const std::vector<SkewPermutonEstimate>& skew_replicas(double corr, double q, int replicas) {
        auto& slot = skew[{corr, q}];
        if (slot.empty()) {
            SkewSimOptions o;
            o.corr = corr;
            o.q = q;
            o.n_steps = work.skew_steps;
            o.m = work.skew_m;
            o.replicas = replicas;
            o.seed = seed(static_cast<std::uint64_t>(std::llround(1e6 * (corr + 2.0) + 1e3 * q)));
            slot = simulate_skew_permuton(o);
        }
        return slot;
    }
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

struct Outcome {
    bool passed;
    std::string detail;
};

Outcome duration_normalization(Context&) {
    boost::math::quadrature::exp_sinh<double> integrator;
    const std::pair<double, double> pairs[] = {{0.5, 0.5}, {1.0, 2.0}, {2.0, 1.0}, {3.0, 0.2}};
    double worst = 0.0;
    for (const auto& [x, r] : pairs) {
        const double total = integrator.integrate([&](double t) { return cone_duration_density(t, x, r); });
        worst = std::max(worst, std::abs(total - 1.0));
    }
    return {worst <= kDurationNormTol, "max |int p~ dt - 1| = " + fmt(worst) + " over 4 (x,r) pairs, tol " + fmt(kDurationNormTol)};
}

Outcome images_chain(Context& ctx) {
    boost::math::quadrature::exp_sinh<double> integrator;
    Philox4x32 rng = substream(ctx.seed(2), 0);
    double worst_joint = 0.0, worst_mass = 0.0;
    for (int i = 0; i < 10; ++i) {
        const double rad = 0.3 + 1.7 * rng.uniform();
        const double arg = 0.05 + (std::numbers::pi / 3.0 - 0.1) * rng.uniform();
        const double r = 0.2 + 1.8 * rng.uniform();
        const double x = rad * std::cos(arg), y = rad * std::sin(arg);
        const double lhs = integrator.integrate([&](double t) { return cone_joint_density(x, y, t, r); });
        const double rhs = cone_exit_density(x, y, r);
        worst_joint = std::max(worst_joint, std::abs(lhs - rhs) / rhs);
        const double mass = integrator.integrate([&](double rr) { return cone_exit_density(x, y, rr); });
        worst_mass = std::max(worst_mass, std::abs(mass - 3.0 * arg / std::numbers::pi));
    }
    const bool ok = worst_joint <= kJointVsExitRelTol && worst_mass <= kExitMassTol;
    return {ok, "max rel |int p1 dt - p2| = " + fmt(worst_joint) + " (tol " + fmt(kJointVsExitRelTol) +
                    "), max |int p2 dr - 3arg/pi| = " + fmt(worst_mass) + " (tol " + fmt(kExitMassTol) + ")"};
}

Outcome exit_sides(Context& ctx) {
    const double angles[] = {std::numbers::pi / 12, std::numbers::pi / 9, std::numbers::pi / 6, std::numbers::pi / 4};
    bool ok = true;
    std::string detail;
    for (int i = 0; i < 4; ++i) {
        const ConePoint z{std::cos(angles[i]), std::sin(angles[i])};
        const ExitTally tally = exit_tally(z, ctx.work.side_step, static_cast<std::uint64_t>(ctx.work.side_paths),
                                           ctx.seed(30 + static_cast<std::uint64_t>(i)));
        const double p = 3.0 * angles[i] / std::numbers::pi;
        const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(tally.n_paths));
        const double z_score = (tally.upper_fraction() - p) / se;
        ok = ok && std::abs(z_score) <= kSideSigmas && tally.censored == 0;
        detail += (i ? "; " : "") + std::string("arg=") + fmt(angles[i], 3) + ": " + fmt(tally.upper_fraction(), 5) +
                  " vs " + fmt(p, 5) + " (" + fmt(z_score, 2) + " se)";
    }
    return {ok, std::to_string(ctx.work.side_paths) + " paths, step " + fmt(ctx.work.side_step) + ": " + detail};
}

Outcome joint_law(Context& ctx) {
    const ConePoint z{1.0, 0.4};
    const JointHistogram hist = mc_joint_histogram(z, ctx.work.joint_step, ctx.work.joint_paths, default_t_edges(),
                                                   default_r_edges(), ctx.seed(4));
    const HistogramReport report = compare_histogram(hist, z, kJointMinExpected);
    const bool ok = report.consistent && report.well_populated > 0 && report.max_rel_dev <= kJointBinRelTol;
    return {ok, std::to_string(ctx.work.joint_paths) + " paths at 1+0.4i: max rel dev " + fmt(report.max_rel_dev) +
                    " on " + std::to_string(report.well_populated) + " bins with >= 500 expected (tol " +
                    fmt(kJointBinRelTol) + "), chi2 " + fmt(report.chi_square) + " dof " + std::to_string(report.dof)};
}

Outcome pb_grid_properties(Context& ctx) {
    const DensityGrid& g = ctx.pb();
    const int n = g.resolution;
    double marginal = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0, col = 0.0;
        for (int j = 0; j < n; ++j) {
            row += g.at(i, j);
            col += g.at(j, i);
        }
        marginal = std::max({marginal, std::abs(row / n - 1.0), std::abs(col / n - 1.0)});
    }
    int sym_fail = 0;
    double worst_ratio = 0.0;
    bool nonneg = true;
    const auto check = [&](int r1, int c1, int r2, int c2) {
        const double diff = std::abs(g.at(r1, c1) - g.at(r2, c2));
        const double bound = kSymmetryErrMultiple * (g.error_at(r1, c1) + g.error_at(r2, c2));
        if (diff > bound && diff > 1e-14) ++sym_fail;
        if (bound > 0.0) worst_ratio = std::max(worst_ratio, diff / bound * kSymmetryErrMultiple);
    };
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            check(r, c, c, r);
            check(r, c, n - 1 - r, n - 1 - c);
            nonneg = nonneg && g.at(r, c) >= 0.0;
        }
    }
    const bool ok = marginal <= kMarginalTol && sym_fail == 0 && nonneg;
    return {ok, "R=" + std::to_string(n) + ": max marginal dev " + fmt(marginal) + " (tol " + fmt(kMarginalTol) +
                    "), symmetry violations " + std::to_string(sym_fail) + " (worst diff " + fmt(worst_ratio, 3) +
                    "x reported error), clamped cells " + std::to_string(g.clamped_cells) +
                    (nonneg ? ", all values >= 0" : ", NEGATIVE values") + ", " + fmt(g.wall_time_seconds, 3) + " s"};
}

Outcome qmc_oracle(Context& ctx) {
    const std::array<double, 4> points[] = {{0.25, 0.25, 0.25, 0.25},
                                            {0.1, 0.2, 0.3, 0.4},
                                            {0.5, 0.2, 0.2, 0.1},
                                            {0.05, 0.45, 0.3, 0.2},
                                            {0.7, 0.1, 0.1, 0.1}};
    double worst = 0.0;
    std::string detail;
    for (std::size_t i = 0; i < 5; ++i) {
        const Estimate quad = baxter_g(points[i], QuadratureSpec{});
        const Estimate qmc = oracle::qmc_baxter_g(points[i], ctx.work.qmc_points, ctx.seed(60 + i));
        const double rel = std::abs(quad.value - qmc.value) / std::abs(qmc.value);
        worst = std::max(worst, rel);
        detail += (i ? "; " : "") + fmt(quad.value, 6) + " vs " + fmt(qmc.value, 6) + " +- " + fmt(qmc.error, 2);
    }
    return {worst <= kQmcRelTol, "max rel diff " + fmt(worst) + " (tol " + fmt(kQmcRelTol) + "): " + detail};
}

/// Cell masses of a midpoint-sampled density on a coarser grid, treating the
/// density as constant on each fine cell.
PermutonGrid bin_density(const DensityGrid& g, int out_res) {
    PermutonGrid out(out_res);
    const int n = g.resolution;
    const auto overlap = [&](int fine, int coarse) {
        const double lo = std::max(static_cast<double>(fine) / n, static_cast<double>(coarse) / out_res);
        const double hi = std::min(static_cast<double>(fine + 1) / n, static_cast<double>(coarse + 1) / out_res);
        return std::max(0.0, hi - lo);
    };
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            for (int R = 0; R < out_res; ++R) {
                const double wy = overlap(r, R);
                if (wy == 0.0) continue;
                for (int C = 0; C < out_res; ++C) {
                    const double wx = overlap(c, C);
                    if (wx > 0.0) out.at(R, C) += g.at(r, c) * wx * wy;
                }
            }
        }
    }
    out.normalize();
    return out;
}

Outcome empirical_vs_analytic(Context& ctx) {
    const SampleBatch& batch = ctx.baxter_batch();
    const PermutonGrid empirical = empirical_intensity(batch, 8);
    const PermutonGrid analytic = bin_density(ctx.pb(), 8);
    const double tv = total_variation(empirical, analytic);
    return {tv < kTvTol, std::to_string(batch.permutations.size()) + " samples at n=12 (acceptance " +
                             fmt(batch.acceptance_rate(), 3) + "): TV to binned p_B " + fmt(tv) + " (tol " + fmt(kTvTol) + ")"};
}

Outcome inversion_expectation(Context& ctx) {
    const SampleBatch& batch = ctx.baxter_batch();
    double sum = 0.0;
    for (const auto& p : batch.permutations) {
        sum += static_cast<double>(inversion_count(p)) / static_cast<double>(binomial(p.size(), 2));
    }
    const double baxter_mean = sum / static_cast<double>(batch.permutations.size());

    const auto& reps = ctx.skew_replicas(-0.5, 0.5, ctx.work.skew_replicas);
    double s1 = 0.0, s2 = 0.0;
    for (const auto& est : reps) {
        const double v = inversion_proportion(est);
        s1 += v;
        s2 += v * v;
    }
    const double k = static_cast<double>(reps.size());
    const double skew_mean = s1 / k;
    const double skew_se = std::sqrt(std::max(0.0, s2 / k - skew_mean * skew_mean) / (k - 1.0));
    const bool ok = std::abs(baxter_mean - 0.5) <= kBaxterInvTol && std::abs(skew_mean - 0.5) <= kSkewInvTol;
    return {ok, "Baxter n=12 mean occ(21) " + fmt(baxter_mean, 5) + " (tol " + fmt(kBaxterInvTol) + "); " +
                    std::to_string(reps.size()) + " skew replicas at (-1/2,1/2): " + fmt(skew_mean, 5) + " +- " +
                    fmt(skew_se, 2) + " (tol " + fmt(kSkewInvTol) + ")"};
}

Outcome skew_endpoints(Context& ctx) {
    SkewSimOptions o;
    o.corr = -0.5;
    o.n_steps = ctx.work.skew_steps;
    o.m = ctx.work.skew_m;
    o.replicas = 4;
    o.seed = ctx.seed(9);
    o.q = 0.0;
    bool identity = true;
    double inv0 = 0.0;
    for (const auto& est : simulate_skew_permuton(o)) {
        for (const auto& [t, phi] : est.phi_samples) identity = identity && phi == t;
        inv0 = std::max(inv0, inversion_proportion(est));
    }
    o.q = 1.0;
    double inv1 = 1.0;
    for (const auto& est : simulate_skew_permuton(o)) inv1 = std::min(inv1, inversion_proportion(est));
    const bool ok = identity && inv0 == 0.0 && inv1 > kAntiDiagonalMin;
    return {ok, "m=" + std::to_string(o.m) + ": q=0 phi(t)=t " + (identity ? "exactly" : "NOT exactly") +
                    ", occ(21)=" + fmt(inv0) + "; q=1 min occ(21)=" + fmt(inv1, 5) + " (need > " + fmt(kAntiDiagonalMin) + ")"};
}

Outcome positivity(Context& ctx) {
    std::vector<Permutation> patterns;
    for (int k = 1; k <= 4; ++k) {
        for (auto& p : all_permutations(k)) patterns.push_back(std::move(p));
    }
    bool ok = true;
    std::string detail = std::to_string(patterns.size()) + " patterns, " + std::to_string(ctx.work.occ_tuples) + " tuples each";
    const std::pair<double, double> params[] = {{-0.5, 0.5}, {-0.809, 0.3}};
    for (int i = 0; i < 2; ++i) {
        const auto [corr, q] = params[i];
        const auto& reps = ctx.skew_replicas(corr, q, i == 0 ? ctx.work.skew_replicas : ctx.work.skew_replicas_second);
        double smallest = 1.0;
        std::string smallest_pattern;
        for (std::size_t j = 0; j < patterns.size(); ++j) {
            const OccEstimate e = estimate_occ(std::span<const SkewPermutonEstimate>(reps), patterns[j],
                                               ctx.work.occ_tuples, ctx.seed(100 + 50 * i + j));
            if (e.proportion < smallest) {
                smallest = e.proportion;
                smallest_pattern = patterns[j].str();
            }
        }
        ok = ok && smallest > 0.0;
        detail += "; (" + fmt(corr) + "," + fmt(q) + ") over " + std::to_string(reps.size()) +
                  " replicas: min " + fmt(smallest) + " at " + smallest_pattern;
    }
    return {ok, detail};
}

Outcome oracle_equivalences(Context& ctx) {
    std::uint64_t mismatches = 0, checked = 0;
    for (int n = 1; n <= 8; ++n) {
        for (const auto& p : all_permutations(n)) {
            ++checked;
            if (is_baxter(p) != oracle::naive_is_baxter(p)) ++mismatches;
        }
    }
    const auto enumerated = enumerate_baxter(4);
    const bool enum_ok = enumerated.size() == 22 && enumerated == oracle::brute_baxter(4);

    std::uint64_t completeness_fail = 0, sigmas = 0;
    std::vector<std::vector<Permutation>> patterns(5);
    for (int k = 1; k <= 4; ++k) patterns[static_cast<std::size_t>(k)] = all_permutations(k);
    for (int n = 1; n <= ctx.work.completeness_max_n; ++n) {
        for (const auto& sigma : all_permutations(n)) {
            ++sigmas;
            for (int k = 1; k <= 4; ++k) {
                std::uint64_t total = 0;
                for (const auto& pi : patterns[static_cast<std::size_t>(k)]) total += count_pattern(pi, sigma).count;
                if (total != binomial(n, k)) ++completeness_fail;
            }
        }
    }
    const bool ok = mismatches == 0 && enum_ok && completeness_fail == 0;
    return {ok, "is_baxter vs naive on " + std::to_string(checked) + " perms (n<=8): " + std::to_string(mismatches) +
                    " mismatches; enumerate_baxter(4) size " + std::to_string(enumerated.size()) +
                    (enum_ok ? " matches brute force" : " DIFFERS from brute force") + "; sum_pi occ = C(n,k) on " +
                    std::to_string(sigmas) + " perms (n<=" + std::to_string(ctx.work.completeness_max_n) +
                    ", k<=4): " + std::to_string(completeness_fail) + " failures"};
}

struct Entry {
    int id;
    const char* name;
    Outcome (*fn)(Context&);
};

constexpr Entry kEntries[] = {
    {1, "cone duration normalization", duration_normalization},
    {2, "method-of-images chain", images_chain},
    {3, "MC exit side vs 3 arg/pi", exit_sides},
    {4, "MC joint law vs p1 bins", joint_law},
    {5, "p_B grid properties", pb_grid_properties},
    {6, "g quadrature vs QMC", qmc_oracle},
    {7, "empirical Baxter vs p_B", empirical_vs_analytic},
    {8, "inversion expectation", inversion_expectation},
    {9, "skew endpoints q=0,1", skew_endpoints},
    {10, "pattern positivity", positivity},
    {11, "oracle equivalences", oracle_equivalences},
};

}  // namespace

std::vector<CriterionResult> run(const Options& options, const std::function<void(const CriterionResult&)>& on_result) {
    Context ctx{options, workload(options.suite), {}, {}, {}};
    std::vector<CriterionResult> results;
    for (const Entry& e : kEntries) {
        if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), e.id) == options.only.end()) {
            continue;
        }
        CriterionResult res;
        res.id = e.id;
        res.name = e.name;
        const auto start = std::chrono::steady_clock::now();
        try {
            const Outcome out = e.fn(ctx);
            res.passed = out.passed;
            res.detail = out.detail;
        } catch (const std::exception& ex) {
            res.passed = false;
            res.detail = std::string("exception: ") + ex.what();
        }
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (on_result) on_result(res);
        results.push_back(std::move(res));
    }
    return results;
}

std::string format_line(const CriterionResult& r) {
    std::ostringstream s;
    s << (r.passed ? "[PASS] " : "[FAIL] ") << r.id << ' ' << r.name << ": " << r.detail << " (" << fmt(r.seconds, 3)
      << " s)";
    return s.str();
}

std::string to_json(const std::vector<CriterionResult>& results, Suite suite) {
    nlohmann::ordered_json j;
    j["suite"] = suite == Suite::full ? "full" : "quick";
    bool all = true;
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        all = all && r.passed;
        list.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"seconds", r.seconds}});
    }
    j["passed"] = all;
    j["criteria"] = list;
    return j.dump(2);
}

}  // namespace permuton::verify
