#include "permuton/baxter.hpp"
#include "permuton/errors.hpp"
#include "permuton/oracles.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <doctest.h>

#include <map>

using namespace permuton;

TEST_CASE("enumeration matches the brute-force scan") {
    // Baxter numbers 1, 2, 6, 22, 92, 422, 2074, 10754.
    const std::size_t known[] = {1, 2, 6, 22, 92, 422, 2074, 10754};
    for (int n = 1; n <= 8; ++n) {
        const auto list = enumerate_baxter(n);
        CHECK(list.size() == known[n - 1]);
        CHECK(std::is_sorted(list.begin(), list.end()));
        if (n <= 7) CHECK(list == oracle::brute_baxter(n));
    }
    CHECK(enumerate_baxter(1) == std::vector<Permutation>{Permutation::identity(1)});
    CHECK(enumerate_baxter(3) == all_permutations(3));
}

TEST_CASE("capability limits") {
    CHECK_THROWS_AS(enumerate_baxter(11), CapabilityError);
    CHECK_THROWS_AS(enumerate_baxter(0), CapabilityError);
    CHECK_THROWS_AS(sample_baxter(17, 1, 0), CapabilityError);
    CHECK_THROWS_AS(empirical_intensity(std::vector<Permutation>{}, 4), InputError);
}

TEST_CASE("samples are Baxter, sized and reproducible") {
    const auto a = sample_baxter(9, 300, 42);
    CHECK(a.permutations.size() == 300);
    for (const auto& p : a.permutations) {
        CHECK(p.size() == 9);
        CHECK(is_baxter(p));
    }
    const auto b = sample_baxter(9, 300, 42);
    CHECK(a.permutations == b.permutations);
    CHECK(a.attempts == b.attempts);
    const auto c = sample_baxter(9, 300, 43);
    CHECK(a.permutations != c.permutations);
    CHECK(sample_baxter(1, 5, 0).permutations == std::vector<Permutation>(5, Permutation::identity(1)));
}

TEST_CASE("n=4 samples are uniform over the 22 Baxter permutations") {
    const auto batch = sample_baxter(4, 22000, 2024);
    std::map<Permutation, int> freq;
    for (const auto& p : batch.permutations) ++freq[p];
    CHECK(freq.size() == 22);
    double chi2 = 0.0;
    for (const auto& [p, c] : freq) chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
    const double pval = boost::math::cdf(boost::math::complement(boost::math::chi_squared(21), chi2));
    CHECK(pval > 0.01);
    // 22 of 24 accepted.
    CHECK(batch.acceptance_rate() == doctest::Approx(22.0 / 24.0).epsilon(0.02));
}

TEST_CASE("mean inversion proportion at n=12 is 1/2") {
    const auto batch = sample_baxter(12, 5000, 7);
    double sum = 0.0;
    for (const auto& p : batch.permutations) sum += static_cast<double>(inversion_count(p)) / 66.0;
    CHECK(std::abs(sum / 5000.0 - 0.5) <= 0.01);
}

TEST_CASE("empirical intensity") {
    const auto id = empirical_intensity(std::vector<Permutation>{Permutation::identity(6)}, 3);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) CHECK(id.at(r, c) == doctest::Approx(r == c ? 1.0 / 3.0 : 0.0));
    }
    // Exact rational average over the 22 diagrams.
    const auto all = enumerate_baxter(4);
    const auto grid = empirical_intensity(all, 4);
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            Rational sum = 0;
            for (const auto& p : all) sum += permuton_mass(p, RationalRect{Rational(c, 4), Rational(c + 1, 4), Rational(r, 4), Rational(r + 1, 4)});
            const double expected = boost::rational_cast<double>(sum / Rational(22));
            CHECK(grid.at(r, c) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    CHECK(grid.total() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("empirical marginals") {
    const auto batch = sample_baxter(12, 200, 3);
    const auto g = empirical_intensity(batch, 4);  // 4 divides 12
    for (int i = 0; i < 4; ++i) {
        CHECK(g.row_sum(i) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(g.col_sum(i) == doctest::Approx(0.25).epsilon(1e-12));
    }
    const auto h = empirical_intensity(batch, 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(std::abs(h.row_sum(i) - 0.2) <= 2.0 / 12.0);
        CHECK(std::abs(h.col_sum(i) - 0.2) <= 2.0 / 12.0);
    }
}

TEST_CASE("grid helpers") {
    PermutonGrid g = PermutonGrid::of_permutation(Permutation::parse("2 1 4 3"), 4);
    CHECK(g.total() == doctest::Approx(1.0));
    const PermutonGrid c = g.coarsen(2);
    CHECK(c.at(0, 0) == doctest::Approx(0.5));
    CHECK(c.at(1, 1) == doctest::Approx(0.5));
    CHECK(total_variation(g, g) == 0.0);
    CHECK(total_variation(g, PermutonGrid::of_permutation(Permutation::identity(4), 4)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(g.coarsen(3), InputError);
}
