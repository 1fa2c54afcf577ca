#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace permuton {

/// Nodes and weights on (0, 1).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped to (0, 1). Newton iteration on P_n.
QuadratureRule gauss_legendre(int n);

/// Value with an error estimate.
struct Estimate {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

/// Breakpoints a = z_0 < ... < z_P = b clustered at both ends:
/// z_k = a + (b - a) (1 - cos(pi k / P)) / 2.
std::vector<double> cosine_panels(double a, double b, int panels);

namespace detail {

template <typename F>
void simpson_refine(F& f, double a, double fa, double m, double fm, double b, double fb, double whole,
                    double tol, int depth, Estimate& acc) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        if (depth <= 0 && std::abs(delta) > 15.0 * tol) acc.converged = false;
        acc.value += left + right + delta / 15.0;
        acc.error += std::abs(delta) / 15.0;
        return;
    }
    simpson_refine(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1, acc);
    simpson_refine(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1, acc);
}

}  // namespace detail

/// Integral of f over [a, b]: cosine-graded panels, adaptive Simpson on each.
/// The tolerance rel_tol * |first-pass estimate| + abs_tol is split evenly
/// across panels. Evaluation order is fixed, so results are deterministic.
template <typename F>
Estimate graded_simpson(F&& f, double a, double b, int panels, double rel_tol, double abs_tol = 0.0,
                        int max_depth = 10) {
    Estimate out;
    if (!(b > a)) return out;
    const std::vector<double> z = cosine_panels(a, b, panels);
    const auto p = static_cast<std::size_t>(panels);
    std::vector<double> fz(p + 1), fm(p), whole(p);
    for (std::size_t k = 0; k <= p; ++k) fz[k] = f(z[k]);
    double first_pass = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
        fm[k] = f(0.5 * (z[k] + z[k + 1]));
        whole[k] = (z[k + 1] - z[k]) / 6.0 * (fz[k] + 4.0 * fm[k] + fz[k + 1]);
        first_pass += whole[k];
    }
    const double tol = (rel_tol * std::abs(first_pass) + abs_tol) / static_cast<double>(panels);
    for (std::size_t k = 0; k < p; ++k) {
        detail::simpson_refine(f, z[k], fz[k], 0.5 * (z[k] + z[k + 1]), fm[k], z[k + 1], fz[k + 1], whole[k], tol,
                               max_depth, out);
    }
    return out;
}

}  // namespace permuton
