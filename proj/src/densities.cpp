#include "permuton/densities.hpp"

#include "permuton/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace permuton {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

/// u - 1 + e^{-u} for u >= 0, without cancellation at small u.
double excess(double u) {
    if (u < 0.1) {
        const double u2 = u * u;
        return u2 * (1.0 / 2 - u / 6 + u2 / 24 - u2 * u / 120 + u2 * u2 / 720 - u2 * u2 * u / 5040 +
                     u2 * u2 * u2 / 40320);
    }
    return u + std::expm1(-u);
}

double rho_unchecked(double t, double x, double r) {
    // Tiny t: the exponential underflows before t^2 does, avoid 0 * inf / 0.
    const double e = (x * x + r * r - x * r) / (2.0 * t);
    if (e > 740.0 || std::isinf(t)) return 0.0;
    return std::exp(-(x * x + r * r - x * r) / (2.0 * t)) * excess(1.5 * x * r / t) / (t * t);
}

void require_cone(double x, double y) {
    if (!in_open_cone(x, y)) throw InputError("point must lie strictly inside the pi/3 cone");
}

std::shared_ptr<const QuadratureRule> cached_rule(int n) {
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const QuadratureRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_shared<const QuadratureRule>(gauss_legendre(n));
    return slot;
}

/// Trace of K(a1) K(a2) K(a3) K(a4) where K(a_i) joins axes l_i and l_{i+1},
/// each axis on an n-node rule with l = s u / (1 - u).
double cyclic_trace(const std::array<double, 4>& a, int n, const std::array<double, 4>& scale,
                    const KernelScaling& scaling) {
    const auto rule = cached_rule(n);
    std::array<Eigen::VectorXd, 4> ell, sqrt_w;
    for (std::size_t j = 0; j < 4; ++j) {
        ell[j].resize(n);
        sqrt_w[j].resize(n);
        for (int p = 0; p < n; ++p) {
            const double u = rule->nodes[static_cast<std::size_t>(p)];
            const double one_minus = 1.0 - u;
            ell[j][p] = scaling.length * scale[j] * u / one_minus;
            sqrt_w[j][p] = std::sqrt(rule->weights[static_cast<std::size_t>(p)] * scale[j] / (one_minus * one_minus));
        }
    }
    std::array<Eigen::MatrixXd, 4> k;
    for (std::size_t i = 0; i < 4; ++i) {
        const double t = scaling.time * a[i];
        const auto& from = ell[i];
        const auto& to = ell[(i + 1) % 4];
        k[i].resize(n, n);
        for (int p = 0; p < n; ++p) {
            for (int q = 0; q < n; ++q) {
                k[i](p, q) = sqrt_w[i][p] * rho_unchecked(t, from[p], to[q]) * sqrt_w[(i + 1) % 4][q];
            }
        }
    }
    const Eigen::MatrixXd left = k[0] * k[1];
    const Eigen::MatrixXd right = k[2] * k[3];
    return left.cwiseProduct(right.transpose()).sum();
}

}  // namespace

void validate(const QuadratureSpec& spec) {
    if (!(spec.rel_tol > 0.0 && spec.rel_tol <= 0.1)) throw InputError("rel_tol must lie in (0, 0.1]");
    if (spec.ell_nodes < 8 || spec.z_panels < 8) throw InputError("ell_nodes and z_panels must be >= 8");
    if (!(spec.ell_cut > 0.0)) throw InputError("ell_cut must be positive");
}

double rho(double t, double x, double r) {
    if (!(t > 0.0)) throw InputError("rho requires t > 0");
    if (!(x >= 0.0 && r >= 0.0)) throw InputError("rho requires x, r >= 0");
    return rho_unchecked(t, x, r);
}

double cone_duration_density(double t, double x, double r) {
    if (!(t > 0.0 && x > 0.0 && r > 0.0)) throw InputError("cone duration density requires t, x, r > 0");
    const double s = x * x * x + r * r * r;
    return rho_unchecked(t, x, r) * s * s / (18.0 * x * x * r * r);
}

bool in_open_cone(double x, double y) { return y > 0.0 && y < kSqrt3 * x; }

double cone_joint_density(double x, double y, double t, double r) {
    require_cone(x, y);
    if (!(t > 0.0 && r > 0.0)) throw InputError("cone joint density requires t, r > 0");
    const double q = x * x + y * y + r * r;
    const double two_t = 2.0 * t;
    const double sum = 0.5 * (kSqrt3 * x - y) * std::exp(-(q - r * (x + kSqrt3 * y)) / two_t) -
                       0.5 * (kSqrt3 * x + y) * std::exp(-(q - r * (x - kSqrt3 * y)) / two_t) +
                       y * std::exp(-(q + 2.0 * r * x) / two_t);
    return sum / (2.0 * std::numbers::pi * t * t);
}

double cone_exit_density(double x, double y, double r) {
    require_cone(x, y);
    if (!(r > 0.0)) throw InputError("cone exit density requires r > 0");
    // z^3 = re3 + i im3 maps the cone onto the upper half-plane.
    const double im3 = 3.0 * x * x * y - y * y * y;
    const double re3 = x * x * x - 3.0 * x * y * y;
    const double d = -r * r * r - re3;
    return 3.0 * r * r / std::numbers::pi * im3 / (d * d + im3 * im3);
}

Estimate baxter_g(const std::array<double, 4>& a, const QuadratureSpec& spec, const KernelScaling& scaling,
                  double abs_floor) {
    validate(spec);
    for (double ai : a) {
        if (!(ai > 0.0)) throw InputError("baxter_g requires all a_i > 0");
    }
    if (!(scaling.time > 0.0 && scaling.length > 0.0)) throw InputError("kernel scaling must be positive");
    // Both kernels touching l_j confine it, so the narrower one sets its scale.
    std::array<double, 4> scale{};
    for (std::size_t j = 0; j < 4; ++j) {
        scale[j] = spec.ell_cut * std::sqrt(scaling.time * std::min(a[(j + 3) % 4], a[j])) / scaling.length;
    }
    int n = spec.ell_nodes;
    double coarse = cyclic_trace(a, (3 * n) / 4, scale, scaling);
    double fine = cyclic_trace(a, n, scale, scaling);
    const int budget = 4 * spec.ell_nodes;
    while (true) {
        const double err = std::abs(fine - coarse);
        if (err <= spec.rel_tol * std::abs(fine) + abs_floor) return {fine, err, true};
        if (2 * n > budget) {
            throw AccuracyError("l-integral did not converge within " + std::to_string(budget) + " nodes per axis",
                                fine, err);
        }
        n *= 2;
        coarse = fine;
        fine = cyclic_trace(a, n, scale, scaling);
    }
}

Estimate baxter_density_point(double x, double y, const QuadratureSpec& spec, const KernelScaling& scaling) {
    validate(spec);
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) throw InputError("p_B is defined on the unit square");
    const double lo = std::max(0.0, x + y - 1.0);
    const double hi = std::min(x, y);
    // On the boundary of the square the z-range is empty up to rounding.
    if (!(hi - lo > 1e-12) || x == 1.0 || y == 1.0) return {};

    const auto args = [&](double z) { return std::array<double, 4>{y - z, z, x - z, 1.0 + z - x - y}; };
    const auto interior = [](const std::array<double, 4>& a) {
        return std::all_of(a.begin(), a.end(), [](double v) { return v > 0.0; });
    };

    // l-errors are judged against the integrand's size mid-range, so that the
    // vanishing values near the endpoints are not held to a relative bound.
    const auto mid = args(0.5 * (lo + hi));
    const double g_mid = baxter_g(mid, spec, scaling).value;
    const double floor = 0.1 * spec.rel_tol * std::abs(g_mid);

    std::map<double, double> ell_error;
    const auto integrand = [&](double z) {
        const auto a = args(z);
        if (!interior(a)) return 0.0;  // g vanishes on the boundary of the simplex
        const Estimate g = baxter_g(a, spec, scaling, floor);
        ell_error[z] = g.error;
        return g.value;
    };
    Estimate out = graded_simpson(integrand, lo, hi, spec.z_panels, spec.rel_tol);

    // Integrate the l-error estimates with the first-pass Simpson rule.
    const std::vector<double> z = cosine_panels(lo, hi, spec.z_panels);
    const auto err_at = [&](double zz) {
        const auto it = ell_error.find(zz);
        return it == ell_error.end() ? 0.0 : it->second;
    };
    double ell_total = 0.0;
    for (std::size_t k = 0; k + 1 < z.size(); ++k) {
        ell_total +=
            (z[k + 1] - z[k]) / 6.0 * (err_at(z[k]) + 4.0 * err_at(0.5 * (z[k] + z[k + 1])) + err_at(z[k + 1]));
    }
    out.error += ell_total;
    return out;
}

Estimate separable_density_point(double q, double x, double y, double rel_tol, int panels) {
    if (!(q > 0.0 && q < 1.0)) throw InputError("p_S^q requires q in (0, 1)");
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) throw InputError("p_S^q is defined on the unit square");
    if (panels < 1) throw InputError("panel count must be >= 1");
    const double lo = std::max(0.0, x + y - 1.0);
    const double hi = std::min(x, y);
    if (!(hi > lo)) return {};

    const double q2 = q * q;
    const double p2 = (1.0 - q) * (1.0 - q);
    const double k = 3.0 * q2 * p2 / (2.0 * std::numbers::pi);
    // With A = a, B = x-a, C = 1-x-y+a, D = y-a the integrand
    // k / ((ABCD)^{3/2} S^{5/2}), S = q^2/A + (1-q)^2/B + q^2/C + (1-q)^2/D,
    // equals k ABCD / S'^{5/2} with S' = S ABCD (a polynomial).
    const auto integrand = [&](double a) {
        const double aa = a, bb = x - a, cc = 1.0 - x - y + a, dd = y - a;
        const double prod = aa * bb * cc * dd;
        if (!(prod > 0.0)) return 0.0;
        const double s = q2 * bb * cc * dd + p2 * aa * cc * dd + q2 * aa * bb * dd + p2 * aa * bb * cc;
        return k * prod / (s * s * std::sqrt(s));
    };
    // a = lo + (hi - lo)(1 - cos th)/2 absorbs the inverse-square-root
    // endpoint singularity on the diagonal and anti-diagonal; Gauss-Legendre
    // panels in th never touch the endpoints.
    const double half = 0.5 * (hi - lo);
    const auto in_theta = [&](double th) { return integrand(lo + half * (1.0 - std::cos(th))) * half * std::sin(th); };
    const auto fine_rule = cached_rule(20);
    const auto coarse_rule = cached_rule(10);
    const auto panel_sum = [&](const QuadratureRule& rule) {
        double total = 0.0;
        const double w = std::numbers::pi / panels;
        for (int p = 0; p < panels; ++p) {
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                total += w * rule.weights[i] * in_theta(w * (p + rule.nodes[i]));
            }
        }
        return total;
    };
    const double fine = panel_sum(*fine_rule);
    const double coarse = panel_sum(*coarse_rule);
    Estimate out{fine, std::abs(fine - coarse), true};
    if (out.error > rel_tol * std::abs(fine) + 1e-300) {
        // Refine by doubling the panel count once more before giving up.
        if (panels < 1024) return separable_density_point(q, x, y, rel_tol, 2 * panels);
        throw AccuracyError("p_S^q quadrature did not converge", out.value, out.error);
    }
    return out;
}

double DensityGrid::mean() const {
    double s = 0.0;
    for (double v : values) s += v;
    return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

namespace {

template <typename CellFn>
void evaluate_cells(DensityGrid& grid, CellFn&& cell) {
    const int r = grid.resolution;
    const int n_cells = r * r;
    grid.values.assign(static_cast<std::size_t>(n_cells), 0.0);
    grid.errors.assign(static_cast<std::size_t>(n_cells), 0.0);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < n_cells; ++i) {
        try {
            const Estimate e = cell(grid.midpoint(i % r), grid.midpoint(i / r));
            grid.values[static_cast<std::size_t>(i)] = e.value;
            grid.errors[static_cast<std::size_t>(i)] = e.error;
        } catch (...) {
#pragma omp critical(permuton_grid_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

DensityGrid baxter_density_grid(int resolution, const QuadratureSpec& spec, const KernelScaling& scaling) {
    validate(spec);
    if (resolution < 4) throw InputError("p_B grid resolution must be >= 4");
    const auto start = std::chrono::steady_clock::now();
    DensityGrid grid;
    grid.resolution = resolution;
    grid.spec = spec;
    const double h = 1.0 / resolution;
    // The density behaves like sqrt(distance) at the edges of the square and
    // diverges at the corners, where a midpoint badly misjudges the cell mass.
    // Edge and corner cells are averaged with a rule graded toward the edge
    // (x = edge + h w^2); other cells keep the midpoint value.
    enum class Axis { mid, plain, low_edge, high_edge };
    const auto axis_nodes = [&](int i, Axis kind, int n) {
        std::vector<std::pair<double, double>> out;  // (coordinate, weight)
        const double lo = i * h;
        if (kind == Axis::mid) {
            out.emplace_back(lo + 0.5 * h, 1.0);
            return out;
        }
        const auto rule = cached_rule(n);
        for (std::size_t k = 0; k < rule->nodes.size(); ++k) {
            const double w = rule->nodes[k], wt = rule->weights[k];
            if (kind == Axis::plain) out.emplace_back(lo + h * w, wt);
            if (kind == Axis::low_edge) out.emplace_back(lo + h * w * w, 2.0 * w * wt);
            if (kind == Axis::high_edge) out.emplace_back(lo + h - h * w * w, 2.0 * w * wt);
        }
        return out;
    };
    const auto axis_kind = [&](int i, bool near_corner) {
        if (i == 0) return Axis::low_edge;
        if (i == resolution - 1) return Axis::high_edge;
        return near_corner ? Axis::plain : Axis::mid;
    };
    evaluate_cells(grid, [&](double x, double y) {
        const int i = static_cast<int>(x * resolution), j = static_cast<int>(y * resolution);
        const auto from_edge = [&](int k) { return std::min(k, resolution - 1 - k); };
        const bool near_corner = from_edge(i) < 3 && from_edge(j) < 3;
        const Axis kx = axis_kind(i, near_corner), ky = axis_kind(j, near_corner);
        if (kx == Axis::mid && ky == Axis::mid) return baxter_density_point(x, y, spec, scaling);
        const bool corner = from_edge(i) == 0 && from_edge(j) == 0;
        const auto average = [&](int n, double& point_error) {
            double sum = 0.0;
            point_error = 0.0;
            for (const auto& [px, wx] : axis_nodes(i, kx, n)) {
                for (const auto& [py, wy] : axis_nodes(j, ky, n)) {
                    const Estimate e = baxter_density_point(px, py, spec, scaling);
                    sum += wx * wy * e.value;
                    point_error += wx * wy * e.error;
                }
            }
            return sum;
        };
        // Corner cells: polar-like map from the corner, split along the
        // diagonal so the ridge lies on a triangle edge; the radial Jacobian
        // cancels the 1/r growth and u = w^2 grades toward the edges.
        const auto corner_average = [&](int n, double& point_error) {
            const double ox = i == 0 ? 0.0 : 1.0, oy = j == 0 ? 0.0 : 1.0;
            const double sx = i == 0 ? h : -h, sy = j == 0 ? h : -h;
            const auto rule = cached_rule(n);
            double sum = 0.0;
            point_error = 0.0;
            for (std::size_t p = 0; p < rule->nodes.size(); ++p) {
                for (std::size_t q = 0; q < rule->nodes.size(); ++q) {
                    const double a = rule->nodes[p], w = rule->nodes[q], u = w * w;
                    const double wt = rule->weights[p] * rule->weights[q] * 2.0 * w * a;
                    const Estimate e1 = baxter_density_point(ox + sx * a, oy + sy * a * u, spec, scaling);
                    const Estimate e2 = baxter_density_point(ox + sx * a * u, oy + sy * a, spec, scaling);
                    sum += wt * (e1.value + e2.value);
                    point_error += wt * (e1.error + e2.error);
                }
            }
            return sum;
        };
        double fine_err = 0.0, coarse_err = 0.0;
        const double fine = corner ? corner_average(4, fine_err) : average(3, fine_err);
        const double coarse = corner ? corner_average(3, coarse_err) : average(2, coarse_err);
        return Estimate{fine, fine_err + std::abs(fine - coarse), true};
    });

    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        double& v = grid.values[i];
        if (v >= 0.0) continue;
        if (-v <= grid.errors[i]) {
            v = 0.0;
            ++grid.clamped_cells;
        } else {
            throw AccuracyError("p_B quadrature produced a negative value beyond its error estimate", v,
                                grid.errors[i]);
        }
    }
    const double mass = grid.mean();
    if (!(mass > 0.0)) throw AccuracyError("p_B grid has no mass", mass, 0.0);
    grid.norm_const = 1.0 / mass;
    for (double& v : grid.values) v *= grid.norm_const;
    for (double& e : grid.errors) {
        e *= grid.norm_const;
        grid.max_reported_error = std::max(grid.max_reported_error, e);
    }
    grid.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return grid;
}

DensityGrid separable_density_grid(double q, int resolution, const QuadratureSpec& spec) {
    validate(spec);
    if (!(q > 0.0 && q < 1.0)) throw InputError("p_S^q requires q in (0, 1)");
    if (resolution < 4) throw InputError("p_S^q grid resolution must be >= 4");
    const auto start = std::chrono::steady_clock::now();
    DensityGrid grid;
    grid.resolution = resolution;
    grid.spec = spec;
    const double tol = std::min(spec.rel_tol, 1e-8);
    const double h = 1.0 / resolution;
    const auto fine = cached_rule(8);
    const auto coarse = cached_rule(5);
    // Cell averages rather than midpoint values: the density has a square-root
    // cusp along x = y and x + y = 1, which are cell diagonals. The cell is cut
    // into four triangles at its centre; on each, u = sin^2(pi w / 2) grades
    // toward both diagonal edges.
    const auto triangle_sum = [&](double cx, double cy, double ax, double ay, double bx, double by,
                                  const QuadratureRule& rule) {
        double total = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double s = rule.nodes[i];
            for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
                const double w = rule.nodes[j];
                const double u = std::sin(0.5 * std::numbers::pi * w) * std::sin(0.5 * std::numbers::pi * w);
                const double du = 0.5 * std::numbers::pi * std::sin(std::numbers::pi * w);
                const double x = cx + s * ((1 - u) * (ax - cx) + u * (bx - cx));
                const double y = cy + s * ((1 - u) * (ay - cy) + u * (by - cy));
                total += rule.weights[i] * rule.weights[j] * s * du * separable_density_point(q, x, y, tol).value;
            }
        }
        // |det| of the two corner vectors is h^2 / 2 for every triangle here.
        return total * 0.5 * h * h;
    };
    evaluate_cells(grid, [&](double cx, double cy) {
        const double x0 = cx - 0.5 * h, x1 = cx + 0.5 * h, y0 = cy - 0.5 * h, y1 = cy + 0.5 * h;
        const double corners[5][2] = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
        double f = 0.0, c = 0.0;
        for (int k = 0; k < 4; ++k) {
            const auto& a = corners[k];
            const auto& b = corners[k + 1];
            f += triangle_sum(cx, cy, a[0], a[1], b[0], b[1], *fine);
            c += triangle_sum(cx, cy, a[0], a[1], b[0], b[1], *coarse);
        }
        return Estimate{f / (h * h), std::abs(f - c) / (h * h), true};
    });
    grid.norm_const = 1.0;
    for (double e : grid.errors) grid.max_reported_error = std::max(grid.max_reported_error, e);
    grid.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return grid;
}

}  // namespace permuton
