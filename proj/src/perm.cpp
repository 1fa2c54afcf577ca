#include "permuton/perm.hpp"

#include "permuton/errors.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

namespace permuton {

namespace {

bool is_bijection(const std::vector<int>& v) {
    std::vector<char> seen(v.size() + 1, 0);
    for (int x : v) {
        if (x < 1 || x > static_cast<int>(v.size()) || seen[static_cast<std::size_t>(x)]) return false;
        seen[static_cast<std::size_t>(x)] = 1;
    }
    return true;
}

/// Ranks of `vals` (all distinct) as a 1-based permutation.
std::vector<int> ranks_of(std::span<const int> vals) {
    std::vector<int> order(vals.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    std::vector<int> rank(vals.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank[static_cast<std::size_t>(order[r])] = static_cast<int>(r) + 1;
    return rank;
}

template <typename T>
T overlap(T a1, T a2, T b1, T b2) {
    const T lo = std::max(a1, b1);
    const T hi = std::min(a2, b2);
    return hi > lo ? hi - lo : T(0);
}

template <typename R>
void validate_rect(const R& r) {
    using T = decltype(r.x1);
    const T zero(0), one(1);
    if (!(r.x1 <= r.x2 && r.y1 <= r.y2 && r.x1 >= zero && r.y1 >= zero && r.x2 <= one && r.y2 <= one)) {
        throw InputError("rectangle must satisfy 0 <= x1 <= x2 <= 1 and 0 <= y1 <= y2 <= 1");
    }
}

}  // namespace

Permutation::Permutation(std::vector<int> values) : values_(std::move(values)) {
    if (values_.empty()) throw InputError("permutation must have size >= 1");
    if (!is_bijection(values_)) throw InputError("not a permutation of 1..n: " + str());
}

Permutation Permutation::identity(int n) {
    std::vector<int> v(static_cast<std::size_t>(std::max(n, 0)));
    std::iota(v.begin(), v.end(), 1);
    return Permutation(std::move(v));
}

Permutation Permutation::decreasing(int n) {
    std::vector<int> v(static_cast<std::size_t>(std::max(n, 0)));
    std::iota(v.rbegin(), v.rend(), 1);
    return Permutation(std::move(v));
}

Permutation Permutation::parse(std::string_view text) {
    std::vector<int> v;
    const bool spaced = text.find_first_of(" \t,") != std::string_view::npos;
    if (spaced) {
        std::string s(text);
        std::replace(s.begin(), s.end(), ',', ' ');
        std::istringstream in(s);
        std::string tok;
        while (in >> tok) {
            if (!std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); })) {
                throw InputError("bad permutation token '" + tok + "'");
            }
            v.push_back(std::stoi(tok));
        }
    } else {
        for (char c : text) {
            if (!std::isdigit(static_cast<unsigned char>(c)) || c == '0') {
                throw InputError("bad permutation '" + std::string(text) + "'");
            }
            v.push_back(c - '0');
        }
    }
    return Permutation(std::move(v));
}

std::string Permutation::str() const {
    std::string out;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(values_[i]);
    }
    return out;
}

VincularPattern::VincularPattern(Permutation base, std::vector<int> adjacent)
    : base_(std::move(base)), adjacent_(std::move(adjacent)) {
    std::sort(adjacent_.begin(), adjacent_.end());
    adjacent_.erase(std::unique(adjacent_.begin(), adjacent_.end()), adjacent_.end());
    for (int j : adjacent_) {
        if (j < 1 || j >= base_.size()) throw InputError("adjacency slot out of range 1..k-1");
    }
}

VincularPattern VincularPattern::parse(std::string_view text) {
    if (text.find('-') == std::string_view::npos) return VincularPattern(Permutation::parse(text), {});
    std::vector<int> values;
    std::vector<int> adjacent;
    bool prev_in_group = false;
    for (char c : text) {
        if (c == '-') {
            if (!prev_in_group) throw InputError("misplaced dash in pattern '" + std::string(text) + "'");
            prev_in_group = false;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(c)) || c == '0') {
            throw InputError("bad pattern '" + std::string(text) + "'");
        }
        if (prev_in_group) adjacent.push_back(static_cast<int>(values.size()));
        values.push_back(c - '0');
        prev_in_group = true;
    }
    if (!prev_in_group) throw InputError("pattern ends with a dash: '" + std::string(text) + "'");
    return VincularPattern(Permutation(std::move(values)), std::move(adjacent));
}

void validate(const Rect& r) { validate_rect(r); }
void validate(const RationalRect& r) { validate_rect(r); }

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t c = 1;
    for (int i = 1; i <= k; ++i) c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return c;
}

Permutation induced_pattern(const Permutation& sigma, std::span<const int> indices) {
    if (indices.empty()) throw InputError("index set must be nonempty");
    std::vector<int> idx(indices.begin(), indices.end());
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) throw InputError("duplicate index");
    if (idx.front() < 1 || idx.back() > sigma.size()) throw InputError("index out of range");
    std::vector<int> vals;
    vals.reserve(idx.size());
    for (int i : idx) vals.push_back(sigma(i));
    return Permutation(ranks_of(vals));
}

namespace {

/// Depth-first enumeration of increasing index tuples whose values are
/// order-isomorphic to `pat`. Each partial tuple is pruned as soon as its
/// relative order disagrees with the corresponding prefix of `pat`.
/// `must_follow[d]` forces index d to be exactly one past index d-1.
class PatternSearch {
public:
    PatternSearch(std::span<const int> host, std::span<const int> pat, std::vector<char> must_follow)
        : host_(host), pat_(pat), must_follow_(std::move(must_follow)), chosen_(pat.size()) {}

    std::uint64_t count(bool stop_at_first) {
        stop_ = stop_at_first;
        found_ = 0;
        recurse(0, 0);
        return found_;
    }

private:
    bool consistent(std::size_t depth, int value) const {
        for (std::size_t e = 0; e < depth; ++e) {
            if ((host_[chosen_[e]] < value) != (pat_[e] < pat_[depth])) return false;
        }
        return true;
    }

    void recurse(std::size_t depth, std::size_t start) {
        const std::size_t k = pat_.size();
        if (depth == k) {
            ++found_;
            return;
        }
        const std::size_t remaining = k - depth;
        std::size_t last = host_.size() - remaining;
        std::size_t first = start;
        if (depth > 0 && must_follow_[depth]) {
            first = chosen_[depth - 1] + 1;
            last = std::min(last, first);
        }
        for (std::size_t i = first; i <= last && i < host_.size(); ++i) {
            if (!consistent(depth, host_[i])) continue;
            chosen_[depth] = i;
            recurse(depth + 1, i + 1);
            if (stop_ && found_) return;
        }
    }

    std::span<const int> host_;
    std::span<const int> pat_;
    std::vector<char> must_follow_;
    std::vector<std::size_t> chosen_;
    bool stop_ = false;
    std::uint64_t found_ = 0;
};

}  // namespace

PatternCount count_pattern(const Permutation& pattern, const Permutation& sigma) {
    const int k = pattern.size();
    const int n = sigma.size();
    PatternCount out;
    out.total = binomial(n, k);
    if (k > n) return out;
    PatternSearch search(sigma.values(), pattern.values(), std::vector<char>(static_cast<std::size_t>(k), 0));
    out.count = search.count(false);
    return out;
}

bool contains_vincular(const Permutation& sigma, const VincularPattern& pattern) {
    const int k = pattern.size();
    if (k > sigma.size()) return false;
    std::vector<char> must_follow(static_cast<std::size_t>(k), 0);
    for (int j : pattern.adjacent()) must_follow[static_cast<std::size_t>(j)] = 1;
    PatternSearch search(sigma.values(), pattern.base().values(), std::move(must_follow));
    return search.count(true) > 0;
}

bool is_baxter(const Permutation& sigma) {
    // For each adjacent pair (j, j+1) with values a, b, look at the values
    // strictly between min(a,b) and max(a,b) on either side. A descent a > b
    // yields 2-41-3 iff some left value is below some right value; an ascent
    // yields 3-14-2 iff some left value is above some right value.
    const auto v = sigma.values();
    const int n = sigma.size();
    for (int j = 1; j + 2 < n; ++j) {
        const int a = v[static_cast<std::size_t>(j)];
        const int b = v[static_cast<std::size_t>(j + 1)];
        const int lo = std::min(a, b);
        const int hi = std::max(a, b);
        int left_min = hi, left_max = lo;
        for (int i = 0; i < j; ++i) {
            const int x = v[static_cast<std::size_t>(i)];
            if (x > lo && x < hi) {
                left_min = std::min(left_min, x);
                left_max = std::max(left_max, x);
            }
        }
        if (left_min == hi) continue;
        int right_min = hi, right_max = lo;
        for (int k = j + 2; k < n; ++k) {
            const int x = v[static_cast<std::size_t>(k)];
            if (x > lo && x < hi) {
                right_min = std::min(right_min, x);
                right_max = std::max(right_max, x);
            }
        }
        if (right_min == hi) continue;
        if (a > b ? left_min < right_max : left_max > right_min) return false;
    }
    return true;
}

std::uint64_t inversion_count(const Permutation& sigma) {
    // Fenwick tree over values, scanning right to left.
    const int n = sigma.size();
    std::vector<int> tree(static_cast<std::size_t>(n) + 1, 0);
    std::uint64_t inv = 0;
    for (int i = n; i >= 1; --i) {
        const int x = sigma(i);
        for (int p = x - 1; p > 0; p -= p & -p) inv += static_cast<std::uint64_t>(tree[static_cast<std::size_t>(p)]);
        for (int p = x; p <= n; p += p & -p) ++tree[static_cast<std::size_t>(p)];
    }
    return inv;
}

double permuton_mass(const Permutation& sigma, const Rect& r) {
    validate(r);
    const int n = sigma.size();
    const double inv_n = 1.0 / n;
    double mass = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double wx = overlap((i - 1) * inv_n, i * inv_n, r.x1, r.x2);
        if (wx == 0.0) continue;
        const double wy = overlap((sigma(i) - 1) * inv_n, sigma(i) * inv_n, r.y1, r.y2);
        mass += wx * wy;
    }
    return mass * n;
}

Rational permuton_mass(const Permutation& sigma, const RationalRect& r) {
    validate(r);
    const std::int64_t n = sigma.size();
    Rational mass(0);
    for (std::int64_t i = 1; i <= n; ++i) {
        const Rational wx = overlap(Rational(i - 1, n), Rational(i, n), r.x1, r.x2);
        if (wx.numerator() == 0) continue;  // rational == int recurses under C++20 in Boost 1.74
        const std::int64_t s = sigma(static_cast<int>(i));
        mass += wx * overlap(Rational(s - 1, n), Rational(s, n), r.y1, r.y2);
    }
    return mass * n;
}

Permutation perm_of_points(std::span<const Point2> points) {
    if (points.empty()) throw InputError("point set must be nonempty");
    std::vector<std::size_t> by_x(points.size());
    std::iota(by_x.begin(), by_x.end(), 0);
    std::sort(by_x.begin(), by_x.end(), [&](std::size_t a, std::size_t b) { return points[a].x < points[b].x; });
    std::vector<double> ys;
    ys.reserve(points.size());
    for (std::size_t i = 0; i < by_x.size(); ++i) {
        if (i > 0 && points[by_x[i]].x == points[by_x[i - 1]].x) throw InputError("tie in x coordinates");
        ys.push_back(points[by_x[i]].y);
    }
    std::vector<double> sorted_y = ys;
    std::sort(sorted_y.begin(), sorted_y.end());
    if (std::adjacent_find(sorted_y.begin(), sorted_y.end()) != sorted_y.end()) {
        throw InputError("tie in y coordinates");
    }
    std::vector<int> vals;
    vals.reserve(ys.size());
    for (double y : ys) {
        vals.push_back(static_cast<int>(std::lower_bound(sorted_y.begin(), sorted_y.end(), y) - sorted_y.begin()) + 1);
    }
    return Permutation(std::move(vals));
}

std::vector<Permutation> all_permutations(int k) {
    if (k < 1) throw InputError("pattern size must be >= 1");
    std::vector<int> v(static_cast<std::size_t>(k));
    std::iota(v.begin(), v.end(), 1);
    std::vector<Permutation> out;
    do {
        out.emplace_back(v);
    } while (std::next_permutation(v.begin(), v.end()));
    return out;
}

}  // namespace permuton
