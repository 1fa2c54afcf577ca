#pragma once

#include "permuton/cone_mc.hpp"
#include "permuton/densities.hpp"
#include "permuton/grid.hpp"
#include "permuton/perm.hpp"
#include "permuton/skew.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace permuton::io {

/// One permutation per line, space-separated, 1-indexed. Blank lines and
/// lines starting with '#' are skipped.
std::vector<Permutation> read_permutations(std::istream& in);
std::vector<Permutation> read_permutations_file(const std::string& path);
void write_permutations(std::ostream& out, const std::vector<Permutation>& perms);

/// "row,col,mass", 0-indexed, row-major.
void write_grid_csv(std::ostream& out, const PermutonGrid& grid);
PermutonGrid read_grid_csv(std::istream& in);
PermutonGrid read_grid_csv_file(const std::string& path);

/// "x,y,value" at cell midpoints, 12 significant digits, y-major.
void write_density_csv(std::ostream& out, const DensityGrid& grid);
/// {resolution, norm_const, rel_tol, max_reported_error, wall_time_seconds}.
std::string density_sidecar_json(const DensityGrid& grid);

/// "t_lo,t_hi,r_lo,r_hi,count,expected".
void write_histogram_csv(std::ostream& out, const HistogramReport& report);
/// {n_paths, step, chi_square, dof, p_value, max_rel_dev}.
std::string histogram_report_json(const JointHistogram& hist, const HistogramReport& report);

struct SkewSummary {
    double corr = 0.0;
    double q = 0.0;
    int n_steps = 0;
    int m = 0;
    int replicas = 0;
    /// pattern -> (mean, stderr)
    std::map<std::string, std::pair<double, double>> occ_estimates;
};
std::string skew_summary_json(const SkewSummary& summary);

}  // namespace permuton::io
