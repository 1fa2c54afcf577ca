#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace permuton {

using Rational = boost::rational<std::int64_t>;

/// A permutation of {1..n} in one-line notation, 1-indexed.
class Permutation {
public:
    /// Throws InputError unless `values` is a bijection on {1..n}, n >= 1.
    explicit Permutation(std::vector<int> values);

    static Permutation identity(int n);
    static Permutation decreasing(int n);
    /// Parses compact ("2413", only for n <= 9) or space-separated ("2 4 1 3") notation.
    static Permutation parse(std::string_view text);

    int size() const noexcept { return static_cast<int>(values_.size()); }
    /// sigma(i) for 1 <= i <= n.
    int operator()(int i) const { return values_[static_cast<std::size_t>(i - 1)]; }
    std::span<const int> values() const noexcept { return values_; }

    /// Space-separated one-line notation.
    std::string str() const;

    friend bool operator==(const Permutation&, const Permutation&) = default;
    friend auto operator<=>(const Permutation&, const Permutation&) = default;

private:
    std::vector<int> values_;
};

/// A permutation with some adjacent index slots required to be consecutive in
/// the host. Slot j in `adjacent` (1 <= j < k) ties pattern positions j and j+1.
class VincularPattern {
public:
    VincularPattern(Permutation base, std::vector<int> adjacent);

    /// Dash notation: "2-41-3" is base 2413 with slot 2 adjacent. A pattern
    /// without dashes is read as a classical pattern (no adjacency).
    static VincularPattern parse(std::string_view text);

    const Permutation& base() const noexcept { return base_; }
    std::span<const int> adjacent() const noexcept { return adjacent_; }
    bool is_classical() const noexcept { return adjacent_.empty(); }
    int size() const noexcept { return base_.size(); }

private:
    Permutation base_;
    std::vector<int> adjacent_;
};

/// Axis-aligned rectangle in [0,1]^2.
template <typename T>
struct BasicRect {
    T x1, x2, y1, y2;
};

using Rect = BasicRect<double>;
using RationalRect = BasicRect<Rational>;

/// Throws InputError unless x1<=x2, y1<=y2 and everything lies in [0,1].
void validate(const Rect& r);
void validate(const RationalRect& r);

struct Point2 {
    double x, y;
};

struct PatternCount {
    std::uint64_t count = 0;
    std::uint64_t total = 0;  ///< C(n, k)

    double proportion() const noexcept {
        return total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total);
    }
    Rational exact_proportion() const {
        return total == 0 ? Rational(0)
                          : Rational(static_cast<std::int64_t>(count), static_cast<std::int64_t>(total));
    }
};

std::uint64_t binomial(int n, int k);

/// pat_I(sigma). `indices` are 1-based and need not be sorted; duplicates and
/// out-of-range entries throw InputError.
Permutation induced_pattern(const Permutation& sigma, std::span<const int> indices);

/// Number of k-subsets of positions of `sigma` inducing `pattern`.
PatternCount count_pattern(const Permutation& pattern, const Permutation& sigma);

bool contains_vincular(const Permutation& sigma, const VincularPattern& pattern);

/// Avoids 2-41-3 and 3-14-2. O(n^2).
bool is_baxter(const Permutation& sigma);

/// Number of inversions, O(n log n).
std::uint64_t inversion_count(const Permutation& sigma);

/// mu_sigma(r): mass n per unit area on each diagram square.
double permuton_mass(const Permutation& sigma, const Rect& r);
Rational permuton_mass(const Permutation& sigma, const RationalRect& r);

/// Perm_k of a point set. Ties in x or y throw InputError.
Permutation perm_of_points(std::span<const Point2> points);

/// All permutations of size k in lexicographic order.
std::vector<Permutation> all_permutations(int k);

}  // namespace permuton
