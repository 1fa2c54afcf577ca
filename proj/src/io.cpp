#include "permuton/io.hpp"

#include "permuton/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <tuple>

namespace permuton::io {

namespace {

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return in;
}

}  // namespace

std::vector<Permutation> read_permutations(std::istream& in) {
    std::vector<Permutation> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        try {
            out.push_back(Permutation::parse(line));
        } catch (const InputError& e) {
            throw InputError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Permutation> read_permutations_file(const std::string& path) {
    auto in = open_in(path);
    return read_permutations(in);
}

void write_permutations(std::ostream& out, const std::vector<Permutation>& perms) {
    for (const auto& p : perms) out << p.str() << '\n';
}

void write_grid_csv(std::ostream& out, const PermutonGrid& grid) {
    out << "row,col,mass\n" << std::setprecision(17);
    for (int r = 0; r < grid.resolution(); ++r) {
        for (int c = 0; c < grid.resolution(); ++c) out << r << ',' << c << ',' << grid.at(r, c) << '\n';
    }
}

PermutonGrid read_grid_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("row,col,mass", 0) != 0) throw InputError("grid CSV must start with row,col,mass");
    std::vector<std::tuple<int, int, double>> entries;
    int max_index = -1;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::istringstream ss(line);
        int r = 0, c = 0;
        double mass = 0.0;
        char comma1 = 0, comma2 = 0;
        if (!(ss >> r >> comma1 >> c >> comma2 >> mass) || comma1 != ',' || comma2 != ',' || r < 0 || c < 0 || mass < 0.0) {
            throw InputError("grid CSV line " + std::to_string(lineno) + " is malformed");
        }
        max_index = std::max({max_index, r, c});
        entries.emplace_back(r, c, mass);
    }
    const int res = max_index + 1;
    if (res < 1 || entries.size() != static_cast<std::size_t>(res) * static_cast<std::size_t>(res)) {
        throw InputError("grid CSV does not describe a full square grid");
    }
    PermutonGrid grid(res);
    for (const auto& [r, c, mass] : entries) grid.at(r, c) = mass;
    return grid;
}

PermutonGrid read_grid_csv_file(const std::string& path) {
    auto in = open_in(path);
    return read_grid_csv(in);
}

void write_density_csv(std::ostream& out, const DensityGrid& grid) {
    out << "x,y,value\n" << std::setprecision(12);
    for (int r = 0; r < grid.resolution; ++r) {
        for (int c = 0; c < grid.resolution; ++c) {
            out << grid.midpoint(c) << ',' << grid.midpoint(r) << ',' << grid.at(r, c) << '\n';
        }
    }
}

std::string density_sidecar_json(const DensityGrid& grid) {
    nlohmann::ordered_json j;
    j["resolution"] = grid.resolution;
    j["norm_const"] = grid.norm_const;
    j["rel_tol"] = grid.spec.rel_tol;
    j["max_reported_error"] = grid.max_reported_error;
    j["wall_time_seconds"] = grid.wall_time_seconds;
    return j.dump(2);
}

void write_histogram_csv(std::ostream& out, const HistogramReport& report) {
    out << "t_lo,t_hi,r_lo,r_hi,count,expected\n" << std::setprecision(12);
    for (const auto& b : report.bins) {
        out << b.t_lo << ',' << b.t_hi << ',' << b.r_lo << ',' << b.r_hi << ',' << b.count << ',' << b.expected << '\n';
    }
}

std::string histogram_report_json(const JointHistogram& hist, const HistogramReport& report) {
    nlohmann::ordered_json j;
    j["n_paths"] = hist.n_paths;
    j["step"] = hist.step;
    j["chi_square"] = report.chi_square;
    j["dof"] = report.dof;
    j["p_value"] = report.p_value;
    j["max_rel_dev"] = report.max_rel_dev;
    return j.dump(2);
}

std::string skew_summary_json(const SkewSummary& summary) {
    nlohmann::ordered_json j;
    j["corr"] = summary.corr;
    j["q"] = summary.q;
    j["n_steps"] = summary.n_steps;
    j["m"] = summary.m;
    j["replicas"] = summary.replicas;
    nlohmann::ordered_json occ = nlohmann::ordered_json::object();
    for (const auto& [pattern, est] : summary.occ_estimates) occ[pattern] = {est.first, est.second};
    j["occ_estimates"] = occ;
    return j.dump(2);
}

}  // namespace permuton::io
