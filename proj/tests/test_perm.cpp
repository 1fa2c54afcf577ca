#include "permuton/errors.hpp"
#include "permuton/oracles.hpp"
#include "permuton/perm.hpp"
#include "permuton/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace permuton;

namespace {

Permutation random_perm(int n, Philox4x32& rng) {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 1);
    std::shuffle(v.begin(), v.end(), rng);
    return Permutation(v);
}

}  // namespace

TEST_CASE("permutation validation and parsing") {
    CHECK_THROWS_AS(Permutation({1, 1}), InputError);
    CHECK_THROWS_AS(Permutation({}), InputError);
    CHECK_THROWS_AS(Permutation({0, 1}), InputError);
    CHECK(Permutation::parse("2413") == Permutation({2, 4, 1, 3}));
    CHECK(Permutation::parse("2 3 6 4 1 5 8 7") == Permutation({2, 3, 6, 4, 1, 5, 8, 7}));
    CHECK(Permutation::parse("10 1 2 3 4 5 6 7 8 9").size() == 10);
    CHECK(Permutation({2, 3, 1}).str() == "2 3 1");
}

TEST_CASE("vincular parsing") {
    const auto vp = VincularPattern::parse("2-41-3");
    CHECK(vp.base() == Permutation::parse("2413"));
    CHECK(std::vector<int>(vp.adjacent().begin(), vp.adjacent().end()) == std::vector<int>{2});
    CHECK(VincularPattern::parse("2413").is_classical());
    CHECK_THROWS_AS(VincularPattern::parse("2--413"), InputError);
}

TEST_CASE("induced_pattern examples") {
    const auto s = Permutation::parse("23641587");
    const std::vector<int> idx{2, 3, 5, 6};
    CHECK(induced_pattern(s, idx) == Permutation::parse("2413"));
    const std::vector<int> some{1, 4, 5};
    CHECK(induced_pattern(Permutation::identity(6), some) == Permutation::identity(3));
    const std::vector<int> ends{1, 3};
    CHECK(induced_pattern(Permutation::parse("321"), ends) == Permutation::parse("21"));
    const std::vector<int> empty;
    CHECK_THROWS_AS(induced_pattern(s, empty), InputError);
    const std::vector<int> bad{0, 2};
    CHECK_THROWS_AS(induced_pattern(s, bad), InputError);
    std::vector<int> all(8);
    std::iota(all.begin(), all.end(), 1);
    CHECK(induced_pattern(s, all) == s);
}

TEST_CASE("count_pattern examples") {
    const auto c = count_pattern(Permutation::parse("21"), Permutation::parse("231"));
    CHECK(c.count == 2);
    CHECK(c.exact_proportion() == Rational(2, 3));
    const auto inc = count_pattern(Permutation::parse("12"), Permutation::identity(5));
    CHECK(inc.count == 10);
    CHECK(inc.exact_proportion() == Rational(1));
    CHECK(count_pattern(Permutation::parse("1234"), Permutation::parse("123")).count == 0);
    CHECK(count_pattern(Permutation::parse("1234"), Permutation::parse("123")).proportion() == 0.0);
}

TEST_CASE("count_pattern agrees with subset brute force") {
    Philox4x32 rng(11);
    const auto pats = all_permutations(3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto s = random_perm(1 + trial % 9, rng);
        for (const auto& p : pats) CHECK(count_pattern(p, s).count == oracle::brute_count_pattern(p, s));
        const auto p4 = random_perm(4, rng);
        CHECK(count_pattern(p4, s).count == oracle::brute_count_pattern(p4, s));
    }
}

TEST_CASE("pattern counts over S_k sum to C(n,k)") {
    Philox4x32 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = random_perm(9, rng);
        for (int k = 1; k <= 4; ++k) {
            std::uint64_t total = 0;
            for (const auto& p : all_permutations(k)) total += count_pattern(p, s).count;
            CHECK(total == binomial(9, k));
        }
    }
}

TEST_CASE("contains_vincular examples") {
    const auto vp = VincularPattern::parse("2-41-3");
    CHECK_FALSE(contains_vincular(Permutation::parse("23641587"), vp));
    CHECK(contains_vincular(Permutation::parse("2413"), vp));
    CHECK_FALSE(contains_vincular(Permutation::parse("213"), vp));
}

TEST_CASE("classical contains_vincular agrees with count_pattern") {
    Philox4x32 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const auto s = random_perm(1 + trial % 8, rng);
        const auto p = random_perm(1 + trial % 4, rng);
        CHECK(contains_vincular(s, VincularPattern(p, {})) == (count_pattern(p, s).count > 0));
    }
}

TEST_CASE("vincular containment agrees with a direct scan") {
    // Direct check: a classical occurrence whose adjacent slots are consecutive.
    Philox4x32 rng(8);
    const VincularPattern pats[] = {VincularPattern::parse("2-41-3"), VincularPattern::parse("3-14-2"),
                                    VincularPattern::parse("1-32"), VincularPattern::parse("21-3")};
    for (int trial = 0; trial < 300; ++trial) {
        const auto s = random_perm(3 + trial % 6, rng);
        for (const auto& vp : pats) {
            const int n = s.size(), k = vp.size();
            bool found = false;
            std::vector<int> idx(static_cast<std::size_t>(k));
            std::vector<bool> pick(static_cast<std::size_t>(n), false);
            std::fill(pick.begin(), pick.begin() + std::min(k, n), true);
            if (k <= n) {
                do {
                    std::size_t w = 0;
                    for (int i = 0; i < n; ++i) {
                        if (pick[static_cast<std::size_t>(i)]) idx[w++] = i + 1;
                    }
                    bool adj = true;
                    for (int j : vp.adjacent()) adj = adj && idx[static_cast<std::size_t>(j)] == idx[static_cast<std::size_t>(j) - 1] + 1;
                    if (adj && induced_pattern(s, idx) == vp.base()) found = true;
                } while (!found && std::prev_permutation(pick.begin(), pick.end()));
            }
            CHECK(contains_vincular(s, vp) == found);
        }
    }
}

TEST_CASE("is_baxter examples and naive oracle") {
    CHECK_FALSE(is_baxter(Permutation::parse("2413")));
    CHECK_FALSE(is_baxter(Permutation::parse("3142")));
    CHECK(is_baxter(Permutation::parse("23641587")));
    for (int n = 1; n <= 3; ++n) {
        for (const auto& p : all_permutations(n)) CHECK(is_baxter(p));
    }
    Philox4x32 rng(21);
    for (int trial = 0; trial < 10000; ++trial) {
        const auto s = random_perm(1 + trial % 12, rng);
        REQUIRE(is_baxter(s) == oracle::naive_is_baxter(s));
    }
}

TEST_CASE("is_baxter equals avoidance of both vincular patterns") {
    const auto a = VincularPattern::parse("2-41-3"), b = VincularPattern::parse("3-14-2");
    for (const auto& p : all_permutations(7)) {
        REQUIRE(is_baxter(p) == (!contains_vincular(p, a) && !contains_vincular(p, b)));
    }
}

TEST_CASE("inversion_count") {
    CHECK(inversion_count(Permutation::identity(7)) == 0);
    CHECK(inversion_count(Permutation::decreasing(9)) == 36);
    CHECK(inversion_count(Permutation::parse("231")) == 2);
    Philox4x32 rng(2);
    const auto p21 = Permutation::parse("21");
    for (int trial = 0; trial < 1000; ++trial) {
        const auto s = random_perm(1 + trial % 10, rng);
        REQUIRE(inversion_count(s) == count_pattern(p21, s).count);
    }
}

TEST_CASE("permuton_mass") {
    const auto s = Permutation::parse("21");
    CHECK(permuton_mass(s, RationalRect{0, 1, 0, 1}) == Rational(1));
    CHECK(permuton_mass(s, RationalRect{0, Rational(1, 2), Rational(1, 2), 1}) == Rational(1, 2));
    CHECK(permuton_mass(s, Rect{0.0, 0.5, 0.5, 1.0}) == doctest::Approx(0.5));
    const auto t = Permutation::parse("3 1 4 2 6 5");
    CHECK(permuton_mass(t, RationalRect{Rational(1, 3), Rational(5, 6), 0, 1}) == Rational(1, 2));
    CHECK(permuton_mass(t, RationalRect{0, 1, Rational(1, 6), Rational(2, 3)}) == Rational(1, 2));
    // Partial overlap: a quarter of the square at (1, 3).
    CHECK(permuton_mass(t, RationalRect{0, Rational(1, 12), Rational(2, 6), Rational(5, 12)}) == Rational(1, 24));
    CHECK_THROWS_AS(permuton_mass(t, Rect{0.5, 0.2, 0.0, 1.0}), InputError);
}

TEST_CASE("perm_of_points") {
    const std::vector<Point2> pts{{0.7, 0.6}, {0.1, 0.9}, {0.5, 0.2}};
    CHECK(perm_of_points(pts) == Permutation::parse("312"));
    const std::vector<Point2> diag{{0.1, 0.1}, {0.4, 0.4}, {0.9, 0.9}};
    CHECK(perm_of_points(diag) == Permutation::identity(3));
    const std::vector<Point2> one{{0.3, 0.8}};
    CHECK(perm_of_points(one) == Permutation::identity(1));
    const std::vector<Point2> tie{{0.3, 0.8}, {0.3, 0.1}};
    CHECK_THROWS_AS(perm_of_points(tie), InputError);
    const std::vector<Point2> ytie{{0.3, 0.8}, {0.4, 0.8}};
    CHECK_THROWS_AS(perm_of_points(ytie), InputError);
}

TEST_CASE("all_permutations") {
    CHECK(all_permutations(4).size() == 24);
    const auto p = all_permutations(3);
    CHECK(std::is_sorted(p.begin(), p.end()));
}
