#include "permuton/quadrature.hpp"

#include "permuton/errors.hpp"

namespace permuton {

QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw InputError("Gauss-Legendre rule needs n >= 1");
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const auto legendre = [n](double x, double& p_n, double& dp_n) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        p_n = n == 1 ? x : p1;
        const double p_prev = n == 1 ? 1.0 : p0;
        dp_n = n * (x * p_n - p_prev) / (x * x - 1.0);
    };
    for (int i = 0; i < n; ++i) {
        // Tricomi initial guess for the i-th root, descending from 1.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double p = 0.0, dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            legendre(x, p, dp);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        legendre(x, p, dp);
        // Map [-1, 1] -> (0, 1); nodes come out ascending.
        rule.nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
        rule.weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

std::vector<double> cosine_panels(double a, double b, int panels) {
    if (panels < 1) throw InputError("panel count must be >= 1");
    std::vector<double> z(static_cast<std::size_t>(panels) + 1);
    for (int k = 0; k <= panels; ++k) {
        z[static_cast<std::size_t>(k)] = a + (b - a) * 0.5 * (1.0 - std::cos(std::numbers::pi * k / panels));
    }
    z.front() = a;
    z.back() = b;
    return z;
}

}  // namespace permuton
