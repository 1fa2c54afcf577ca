#include "permuton/cone_mc.hpp"
#include "permuton/errors.hpp"
#include "permuton/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace permuton;

namespace {

ConePoint polar(double r, double arg) { return {r * std::cos(arg), r * std::sin(arg)}; }

// E tau for the pi/3 cone: u = r^2 (cos(2 arg - pi/3) / cos(pi/3) - 1) / 2
// solves u''/2 = -1 with zero boundary values.
double mean_exit_time(ConePoint z) {
    const double r2 = z.x * z.x + z.y * z.y, arg = std::atan2(z.y, z.x);
    return r2 * (std::cos(2 * arg - std::numbers::pi / 3) / 0.5 - 1) / 2;
}

}  // namespace

TEST_CASE("single exits") {
    const ExitRecord rec = simulate_exit({1.0, 0.3}, 1e-3, 5);
    CHECK(rec.tau > 0.0);
    CHECK(rec.exit_r >= 0.0);
    CHECK(rec.side != ExitSide::censored);
    const ExitRecord again = simulate_exit({1.0, 0.3}, 1e-3, 5);
    CHECK(rec.tau == again.tau);
    ExitOptions cap;
    cap.max_time = 1e-3;
    CHECK(simulate_exit({1.0, 0.5}, 1e-4, 5, 0, cap).side == ExitSide::censored);
    CHECK_THROWS_AS(simulate_exit({1.0, 0.0}, 1e-3, 1), InputError);
    CHECK_THROWS_AS(simulate_exit({1.0, 0.3}, 0.1, 1), InputError);
}

TEST_CASE("bisector start exits each side half the time") {
    const ExitTally t = exit_tally(polar(1.0, std::numbers::pi / 6), 1e-3, 100'000, 17);
    CHECK(t.upper + t.lower == t.n_paths);
    CHECK(std::abs(t.upper_fraction() - 0.5) < 0.005);
}

TEST_CASE("exit side follows 3 arg / pi") {
    for (double arg : {std::numbers::pi / 12, std::numbers::pi / 9, std::numbers::pi / 4}) {
        const ExitTally t = exit_tally(polar(1.0, arg), 1e-3, 20'000, 18);
        const double p = 3 * arg / std::numbers::pi;
        CHECK(std::abs(t.upper_fraction() - p) < 3 * std::sqrt(p * (1 - p) / 20'000));
    }
}

TEST_CASE("mean exit time") {
    double previous = 1e9;
    for (double y : {0.5, 0.3, 0.1}) {
        const ConePoint z{1.0, y};
        const ExitTally t = exit_tally(z, 1e-3, 20'000, 19);
        CHECK(t.mean_tau < previous);
        CHECK(t.mean_tau == doctest::Approx(mean_exit_time(z)).epsilon(0.15));
        previous = t.mean_tau;
    }
}

TEST_CASE("smaller steps remove exit-time bias") {
    // Fraction of upper exits before t = 0.35 against the p1 integral.
    const ConePoint z{1.0, 0.4};
    const double exact = joint_bin_probability(z, 0.0, 0.35, 0.0, 50.0);
    ExitOptions plain;
    plain.bridge_correction = false;
    double err[2];
    const double steps[] = {1e-2, 1e-3};
    for (int k = 0; k < 2; ++k) {
        const JointHistogram h = mc_joint_histogram(z, steps[k], 40'000, {0.0, 0.35}, {0.0, 50.0}, 23, plain);
        err[k] = std::abs(static_cast<double>(h.total()) / 40'000 - exact);
    }
    CHECK(err[1] < err[0]);
}

TEST_CASE("histogram bookkeeping and comparison") {
    const ConePoint z{1.0, 0.4};
    const JointHistogram h = mc_joint_histogram(z, 1e-3, 20'000, default_t_edges(), default_r_edges(), 29);
    CHECK(h.counts.size() == h.t_bins() * h.r_bins());
    CHECK(h.total() <= h.n_paths);
    const HistogramReport rep = compare_histogram(h, z, 500);
    CHECK(rep.consistent);
    CHECK(rep.bins.size() == h.counts.size());
    CHECK(rep.dof > 0);
    CHECK(rep.p_value > 1e-4);
    const HistogramReport wrong = compare_histogram(h, {1.0, 0.2});
    CHECK_FALSE(wrong.consistent);
    CHECK_THROWS_AS(mc_joint_histogram(z, 1e-3, 100, default_t_edges(), default_r_edges(), 1), InputError);
}

TEST_CASE("analytic histograms give uniform p-values") {
    const ConePoint z{1.0, 0.4};
    int low = 0;
    double mean = 0;
    const int trials = 40;
    for (int s = 0; s < trials; ++s) {
        const JointHistogram h = oracle::analytic_histogram(z, 100'000, default_t_edges(), default_r_edges(), 500 + static_cast<std::uint64_t>(s));
        const HistogramReport rep = compare_histogram(h, z);
        mean += rep.p_value / trials;
        low += rep.p_value < 0.05;
    }
    CHECK(mean > 0.35);
    CHECK(mean < 0.65);
    CHECK(low <= 6);
}

TEST_CASE("bin probabilities add up to the exit law") {
    const ConePoint z{1.0, 0.4};
    const double total = joint_bin_probability(z, 0.0, 400.0, 0.0, 30.0);
    CHECK(total == doctest::Approx(3 * std::atan2(0.4, 1.0) / std::numbers::pi).epsilon(5e-3));
}
