#pragma once

#include "permuton/quadrature.hpp"

#include <array>
#include <vector>

namespace permuton {

/// Controls the nested quadrature behind p_B.
struct QuadratureSpec {
    double rel_tol = 1e-3;
    /// Gauss-Legendre nodes per l-axis after the map l = s u / (1 - u).
    int ell_nodes = 48;
    /// Cosine-graded panels for the z-integral.
    int z_panels = 64;
    /// Multiplier on the per-axis l-scale s_j = sqrt(min(a_{j-1}, a_j)).
    double ell_cut = 1.0;
};

/// Throws InputError unless rel_tol in (0, 0.1] and node counts >= 8.
void validate(const QuadratureSpec& spec);

/// Replaces rho(t, x, r) by rho(time * t, length * x, length * r). Only used to
/// check that the normalized p_B grid does not depend on such rescalings.
struct KernelScaling {
    double time = 1.0;
    double length = 1.0;
};

/// rho(t, x, r) = t^-2 ((3rx/2t - 1) e^{-(r^2+x^2-rx)/2t} + e^{-(x+r)^2/2t}).
///
/// Evaluated as t^-2 e^{-(r^2+x^2-rx)/2t} (u - 1 + e^{-u}) with u = 3xr/2t,
/// which is nonnegative term by term and avoids the cancellation near x r = 0.
/// Throws InputError for t <= 0 or negative lengths.
double rho(double t, double x, double r);

/// Duration density of the pi/3-cone excursion from x to r e^{i pi/3}:
/// rho(t, x, r) (x^3 + r^3)^2 / (18 x^2 r^2). Requires t, x, r > 0.
double cone_duration_density(double t, double x, double r);

/// Method-of-images joint density p1 of (exit time, exit radius on the upper
/// ray) for Brownian motion from x + iy killed on leaving the pi/3 cone.
double cone_joint_density(double x, double y, double t, double r);

/// Harmonic-measure density p2 of the exit radius on the upper ray.
double cone_exit_density(double x, double y, double r);

/// True iff x + iy lies in the open cone 0 < arg < pi/3.
bool in_open_cone(double x, double y);

/// g(a1..a4) = int_{R+^4} rho(a1,l1,l2) rho(a2,l2,l3) rho(a3,l3,l4) rho(a4,l4,l1) dl.
///
/// The integrand is a cyclic product, so on a shared node set the integral is
/// the trace of a product of four symmetric kernel matrices. The error is the
/// difference to a coarser rule; the node count doubles (up to 4x ell_nodes)
/// until it is within rel_tol |g| + abs_floor, otherwise AccuracyError.
Estimate baxter_g(const std::array<double, 4>& a, const QuadratureSpec& spec, const KernelScaling& scaling = {},
                  double abs_floor = 0.0);

/// Unnormalized p_B(x, y): int_{max(0,x+y-1)}^{min(x,y)} g(y-z, z, x-z, 1+z-x-y) dz.
Estimate baxter_density_point(double x, double y, const QuadratureSpec& spec, const KernelScaling& scaling = {});

/// p_S^q(x, y) with its explicit constant 3 q^2 (1-q)^2 / 2 pi.
Estimate separable_density_point(double q, double x, double y, double rel_tol = 1e-8, int panels = 16);

/// Density samples at cell midpoints of an R x R grid.
struct DensityGrid {
    int resolution = 0;
    /// Row-major; row index is the y bin.
    std::vector<double> values;
    /// Per-cell quadrature error estimates, on the same scale as `values`.
    std::vector<double> errors;
    /// Factor applied to the raw quadrature output (c for p_B, 1 for p_S^q).
    double norm_const = 1.0;
    QuadratureSpec spec;
    double max_reported_error = 0.0;
    int clamped_cells = 0;
    double wall_time_seconds = 0.0;

    double at(int row, int col) const {
        return values[static_cast<std::size_t>(row) * static_cast<std::size_t>(resolution) +
                      static_cast<std::size_t>(col)];
    }
    double error_at(int row, int col) const {
        return errors[static_cast<std::size_t>(row) * static_cast<std::size_t>(resolution) +
                      static_cast<std::size_t>(col)];
    }
    /// Cell midpoint coordinate for index i.
    double midpoint(int i) const { return (i + 0.5) / resolution; }
    /// Mean of values over the grid (integral by the midpoint rule).
    double mean() const;
};

/// p_B on an R x R grid (R >= 4), normalized to unit mass. Interior cells hold
/// midpoint values; edge cells and the 3 x 3 blocks at the corners hold graded
/// cell averages. Cells are
/// evaluated in parallel; each cell is independent, so output is bitwise
/// reproducible for any thread count.
DensityGrid baxter_density_grid(int resolution, const QuadratureSpec& spec, const KernelScaling& scaling = {});

/// p_S^q cell averages on an R x R grid (reported at midpoints), not
/// renormalized (norm_const = 1).
DensityGrid separable_density_grid(double q, int resolution, const QuadratureSpec& spec = {});

}  // namespace permuton
