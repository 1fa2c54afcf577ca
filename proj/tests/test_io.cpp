#include "permuton/errors.hpp"
#include "permuton/io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sstream>

using namespace permuton;

TEST_CASE("permutation text round trip") {
    const std::vector<Permutation> perms{Permutation::parse("2 3 6 4 1 5 8 7"), Permutation::identity(3)};
    std::stringstream s;
    io::write_permutations(s, perms);
    CHECK(s.str() == "2 3 6 4 1 5 8 7\n1 2 3\n");
    CHECK(io::read_permutations(s) == perms);
    std::istringstream with_comments("# header\n\n2 1\n");
    CHECK(io::read_permutations(with_comments).size() == 1);
    std::istringstream bad("1 2\n1 1\n");
    CHECK_THROWS_AS(io::read_permutations(bad), InputError);
}

TEST_CASE("grid CSV round trip") {
    const PermutonGrid g = PermutonGrid::of_permutation(Permutation::parse("3 1 2"), 3);
    std::stringstream s;
    io::write_grid_csv(s, g);
    CHECK(s.str().rfind("row,col,mass\n0,0,0\n", 0) == 0);
    const PermutonGrid back = io::read_grid_csv(s);
    CHECK(back.cells() == g.cells());
    std::istringstream partial("row,col,mass\n0,0,1\n0,1,0\n");
    CHECK_THROWS_AS(io::read_grid_csv(partial), InputError);
    std::istringstream header("x,y\n");
    CHECK_THROWS_AS(io::read_grid_csv(header), InputError);
}

TEST_CASE("density CSV and sidecar") {
    DensityGrid g;
    g.resolution = 2;
    g.values = {0.5, 1.0 / 3.0, 1.5, 2.0};
    g.errors = {0, 0, 0, 0};
    g.norm_const = 4.25;
    std::stringstream s;
    io::write_density_csv(s, g);
    CHECK(s.str() == "x,y,value\n0.25,0.25,0.5\n0.75,0.25,0.333333333333\n0.25,0.75,1.5\n0.75,0.75,2\n");
    const auto j = nlohmann::json::parse(io::density_sidecar_json(g));
    for (const char* key : {"resolution", "norm_const", "rel_tol", "max_reported_error", "wall_time_seconds"}) CHECK(j.contains(key));
    CHECK(j["norm_const"].get<double>() == 4.25);
}

TEST_CASE("histogram outputs") {
    HistogramReport rep;
    rep.bins.push_back({0.0, 0.5, 0.0, 1.0, 12, 11.5});
    rep.chi_square = 1.5;
    rep.dof = 3;
    std::stringstream s;
    io::write_histogram_csv(s, rep);
    CHECK(s.str() == "t_lo,t_hi,r_lo,r_hi,count,expected\n0,0.5,0,1,12,11.5\n");
    JointHistogram h;
    h.n_paths = 100;
    h.step = 1e-4;
    const auto j = nlohmann::json::parse(io::histogram_report_json(h, rep));
    for (const char* key : {"n_paths", "step", "chi_square", "dof", "p_value", "max_rel_dev"}) CHECK(j.contains(key));
}

TEST_CASE("skew summary JSON") {
    io::SkewSummary s{-0.5, 0.5, 10240, 512, 3, {{"21", {0.5, 0.01}}}};
    const auto j = nlohmann::json::parse(io::skew_summary_json(s));
    CHECK(j["occ_estimates"]["21"][0].get<double>() == 0.5);
    CHECK(j["replicas"].get<int>() == 3);
}
