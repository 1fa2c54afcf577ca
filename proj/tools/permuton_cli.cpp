#include "manifest.hpp"

#include "permuton/baxter.hpp"
#include "permuton/cone_mc.hpp"
#include "permuton/densities.hpp"
#include "permuton/errors.hpp"
#include "permuton/io.hpp"
#include "permuton/perm.hpp"
#include "permuton/skew.hpp"
#include "permuton/verify.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

using namespace permuton;
using permuton::cli::RunManifest;

namespace {

enum Exit { kOk = 0, kInput = 2, kCapability = 3, kAccuracy = 4, kVerification = 5 };

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    auto out = open_out(path);
    out << text << '\n';
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); }
};

/// "1,0.4", "1+0.4i" or "1 0.4".
ConePoint parse_cone_point(const std::string& text) {
    static const std::regex complex_form(R"(^\s*([-+]?[0-9.eE+-]+?)\s*([-+])\s*([0-9.eE]+)\s*i\s*$)");
    std::smatch m;
    if (std::regex_match(text, m, complex_form)) {
        const double im = std::stod(m[3].str());
        return {std::stod(m[1].str()), m[2].str() == "-" ? -im : im};
    }
    std::string s = text;
    for (char& c : s) {
        if (c == ',') c = ' ';
    }
    std::istringstream ss(s);
    ConePoint z;
    if (!(ss >> z.x >> z.y)) throw InputError("cannot parse start point '" + text + "' (use x,y or x+yi)");
    return z;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::string s = text;
    for (char& c : s) {
        if (c == ',') c = ' ';
    }
    std::istringstream ss(s);
    double v = 0.0;
    while (ss >> v) out.push_back(v);
    if (!ss.eof()) throw InputError("cannot parse number list '" + text + "'");
    return out;
}

std::vector<std::string> split_patterns(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',' || c == ' ') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

/// "replica,t,phi" rows for the phi-segment estimates.
void write_phi_csv(const std::string& path, const std::vector<SkewPermutonEstimate>& reps) {
    auto out = open_out(path);
    out << "replica,t,phi\n" << std::setprecision(17);
    for (std::size_t r = 0; r < reps.size(); ++r) {
        for (const auto& [t, phi] : reps[r].phi_samples) out << r << ',' << t << ',' << phi << '\n';
    }
}

std::vector<SkewPermutonEstimate> read_phi_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("replica,t,phi", 0) != 0) throw InputError(path + ": expected header replica,t,phi");
    std::vector<SkewPermutonEstimate> reps;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::size_t r = 0;
        double t = 0.0, phi = 0.0;
        char c1 = 0, c2 = 0;
        if (!(ss >> r >> c1 >> t >> c2 >> phi) || c1 != ',' || c2 != ',') throw InputError(path + ": malformed row '" + line + "'");
        if (r > reps.size()) throw InputError(path + ": replicas must be listed in order");
        if (r == reps.size()) reps.emplace_back();
        reps[r].phi_samples.emplace_back(t, phi);
    }
    if (reps.empty()) throw InputError(path + " holds no samples");
    for (auto& est : reps) est.m = static_cast<int>(est.phi_samples.size());
    return reps;
}

void set_threads(int threads) {
    if (const char* env = std::getenv("PERMUTON_THREADS")) {
        try {
            threads = std::stoi(env);
        } catch (const std::exception&) {
            throw InputError("PERMUTON_THREADS must be an integer");
        }
    }
    if (threads < 0) throw InputError("thread count must be >= 0");
    if (threads > 0) omp_set_num_threads(threads);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Permuton densities, samplers and checks"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (0 = all cores; PERMUTON_THREADS overrides)");

    // baxter-density
    auto* bd = app.add_subcommand("baxter-density", "p_B on an R x R midpoint grid");
    int bd_res = 50;
    QuadratureSpec bd_spec;
    std::string bd_out = "baxter_density";
    bd->add_option("--res", bd_res, "Grid resolution (>= 4)")->capture_default_str();
    bd->add_option("--rel-tol", bd_spec.rel_tol, "Relative tolerance")->capture_default_str();
    bd->add_option("--ell-nodes", bd_spec.ell_nodes, "Gauss-Legendre nodes per l-axis")->capture_default_str();
    bd->add_option("--z-panels", bd_spec.z_panels, "Panels for the z-integral")->capture_default_str();
    bd->add_option("--out", bd_out, "Output prefix (.csv, .json, .manifest.json)")->capture_default_str();

    // separable-density
    auto* sd = app.add_subcommand("separable-density", "p_S^q on an R x R midpoint grid");
    double sd_q = 0.5;
    int sd_res = 50;
    std::string sd_out = "separable_density";
    sd->add_option("--q", sd_q, "Skew parameter in (0,1)")->capture_default_str();
    sd->add_option("--res", sd_res, "Grid resolution (>= 4)")->capture_default_str();
    sd->add_option("--out", sd_out, "Output prefix")->capture_default_str();

    // sample-baxter
    auto* sb = app.add_subcommand("sample-baxter", "Uniform Baxter permutations by rejection");
    int sb_n = 12;
    std::size_t sb_count = 1000;
    std::uint64_t sb_seed = 0;
    int sb_streams = kDefaultSamplerStreams;
    std::string sb_out = "baxter.txt";
    sb->add_option("--n", sb_n, "Permutation size (<= 16)")->capture_default_str();
    sb->add_option("--count", sb_count, "Number of samples")->capture_default_str();
    sb->add_option("--seed", sb_seed, "Seed")->required();
    sb->add_option("--streams", sb_streams, "RNG worker streams")->capture_default_str();
    sb->add_option("--out", sb_out, "Permutation text file")->capture_default_str();

    // empirical
    auto* em = app.add_subcommand("empirical", "Average permuton grid of a permutation file");
    std::string em_in, em_out = "empirical.csv";
    int em_grid = 8;
    em->add_option("--in", em_in, "Permutation text file")->required();
    em->add_option("--grid", em_grid, "Grid resolution")->capture_default_str();
    em->add_option("--out", em_out, "Grid CSV")->capture_default_str();

    // skew-sim
    auto* ss = app.add_subcommand("skew-sim", "Skew Brownian permuton replicas");
    SkewSimOptions ss_opt;
    std::uint64_t ss_seed = 0;
    std::string ss_out = "skew";
    std::string ss_patterns = "12,21";
    std::size_t ss_samples = 100'000;
    std::string ss_method = "skew-product";
    ss->add_option("--rho", ss_opt.corr, "Correlation in (-1,1)")->capture_default_str();
    ss->add_option("--q", ss_opt.q, "Skew parameter in [0,1]")->capture_default_str();
    ss->add_option("--steps", ss_opt.n_steps, "Excursion steps")->capture_default_str();
    ss->add_option("--grid", ss_opt.m, "Time grid size m (also the grid resolution)")->capture_default_str();
    ss->add_option("--replicas", ss_opt.replicas, "Independent replicas")->capture_default_str();
    ss->add_option("--seed", ss_seed, "Seed")->required();
    ss->add_option("--patterns", ss_patterns, "Patterns for the summary, comma separated")->capture_default_str();
    ss->add_option("--samples", ss_samples, "Point tuples per pattern estimate")->capture_default_str();
    ss->add_option("--excursion", ss_method, "skew-product or rejection")
        ->check(CLI::IsMember({"skew-product", "rejection"}))
        ->capture_default_str();
    ss->add_option("--out", ss_out, "Output prefix (.csv grid, .phi.csv, .json)")->capture_default_str();

    // occ
    auto* oc = app.add_subcommand("occ", "Pattern proportion from permutations, a grid or phi samples");
    std::string oc_pattern, oc_in, oc_grid, oc_phi, oc_manifest;
    std::size_t oc_samples = 100'000;
    std::uint64_t oc_seed = 0;
    oc->add_option("--pattern", oc_pattern, "Pattern, e.g. 2413 or 2-41-3")->required();
    auto* oc_in_opt = oc->add_option("--in", oc_in, "Permutation text file (exact counts)");
    auto* oc_grid_opt = oc->add_option("--grid", oc_grid, "Grid CSV (row,col,mass)");
    auto* oc_phi_opt = oc->add_option("--phi", oc_phi, "phi samples CSV from skew-sim");
    oc_in_opt->excludes(oc_grid_opt)->excludes(oc_phi_opt);
    oc_grid_opt->excludes(oc_phi_opt);
    oc->add_option("--samples", oc_samples, "Point tuples")->capture_default_str();
    auto* oc_seed_opt = oc->add_option("--seed", oc_seed, "Seed (required for --grid/--phi)");
    oc->add_option("--manifest", oc_manifest, "Also write the manifest here");

    // cone-mc
    auto* cm = app.add_subcommand("cone-mc", "Brownian exits from the pi/3 cone vs p1");
    std::string cm_z = "1,0.4", cm_bins = "default", cm_out = "cone_mc";
    double cm_step = 1e-4;
    std::uint64_t cm_paths = 100'000, cm_seed = 0;
    bool cm_no_bridge = false;
    cm->add_option("--z", cm_z, "Start point, x,y or x+yi")->capture_default_str();
    cm->add_option("--step", cm_step, "Time step in (0, 1e-2]")->capture_default_str();
    cm->add_option("--paths", cm_paths, "Number of paths (>= 1e4)")->capture_default_str();
    cm->add_option("--bins", cm_bins, "'default' or 'NT,NR' uniform bins on [0,2] x [0,3]")->capture_default_str();
    cm->add_option("--seed", cm_seed, "Seed")->required();
    cm->add_flag("--no-bridge", cm_no_bridge, "Disable the Brownian-bridge crossing test");
    cm->add_option("--out", cm_out, "Output prefix (.csv, .json)")->capture_default_str();

    // verify
    auto* vf = app.add_subcommand("verify", "Run the acceptance checks");
    std::string vf_suite = "quick", vf_json;
    std::vector<int> vf_only;
    std::uint64_t vf_seed = verify::Options{}.seed;
    vf->add_option("--suite", vf_suite, "quick or full")->check(CLI::IsMember({"quick", "full"}))->capture_default_str();
    vf->add_option("--only", vf_only, "Run only these criterion ids");
    vf->add_option("--seed", vf_seed, "Seed")->capture_default_str();
    vf->add_option("--json", vf_json, "Write machine-readable results here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInput;
    }

    Timer timer;
    RunManifest manifest;
    try {
        set_threads(threads);
        manifest.parameters["threads"] = threads == 0 ? omp_get_max_threads() : threads;

        if (*bd) {
            validate(bd_spec);
            if (bd_res < 4) throw InputError("--res must be >= 4");
            manifest.subcommand = "baxter-density";
            manifest.parameters.update({{"res", bd_res}, {"rel_tol", bd_spec.rel_tol}, {"ell_nodes", bd_spec.ell_nodes},
                                        {"z_panels", bd_spec.z_panels}, {"ell_cut", bd_spec.ell_cut}});
            const DensityGrid g = baxter_density_grid(bd_res, bd_spec);
            auto csv = open_out(bd_out + ".csv");
            io::write_density_csv(csv, g);
            csv.close();
            write_text(bd_out + ".json", io::density_sidecar_json(g));
            manifest.outputs = {bd_out + ".csv", bd_out + ".json"};
            std::cout << "wrote " << bd_out << ".csv (norm_const " << g.norm_const << ", max error "
                      << g.max_reported_error << ", " << g.wall_time_seconds << " s)\n";
            manifest.wall_time_seconds = timer.seconds();
            manifest.write(bd_out + ".manifest.json");
        } else if (*sd) {
            if (!(sd_q > 0.0 && sd_q < 1.0)) throw InputError("--q must lie in (0,1)");
            if (sd_res < 4) throw InputError("--res must be >= 4");
            manifest.subcommand = "separable-density";
            manifest.parameters.update({{"q", sd_q}, {"res", sd_res}});
            const DensityGrid g = separable_density_grid(sd_q, sd_res);
            auto csv = open_out(sd_out + ".csv");
            io::write_density_csv(csv, g);
            csv.close();
            write_text(sd_out + ".json", io::density_sidecar_json(g));
            manifest.outputs = {sd_out + ".csv", sd_out + ".json"};
            std::cout << "wrote " << sd_out << ".csv (grid mass " << g.mean() << ")\n";
            manifest.wall_time_seconds = timer.seconds();
            manifest.write(sd_out + ".manifest.json");
        } else if (*sb) {
            if (sb_n < 1) throw InputError("--n must be >= 1");
            if (sb_n > kMaxRejectionBaxter) {
                throw CapabilityError("rejection sampling is capped at n <= " + std::to_string(kMaxRejectionBaxter));
            }
            if (sb_streams < 1) throw InputError("--streams must be >= 1");
            manifest.subcommand = "sample-baxter";
            manifest.seed = sb_seed;
            manifest.parameters.update({{"n", sb_n}, {"count", sb_count}, {"streams", sb_streams}});
            const SampleBatch batch = sample_baxter(sb_n, sb_count, sb_seed, sb_streams);
            auto out = open_out(sb_out);
            io::write_permutations(out, batch.permutations);
            out.close();
            manifest.outputs = {sb_out};
            manifest.parameters["measured_acceptance_rate"] = batch.acceptance_rate();
            std::cout << "wrote " << batch.permutations.size() << " permutations to " << sb_out
                      << " (acceptance rate " << batch.acceptance_rate() << ")\n";
            manifest.wall_time_seconds = timer.seconds();
            manifest.write(sb_out + ".manifest.json");
        } else if (*em) {
            if (em_grid < 1) throw InputError("--grid must be >= 1");
            manifest.subcommand = "empirical";
            manifest.parameters.update({{"in", em_in}, {"in_sha256", cli::sha256_file(em_in)}, {"grid", em_grid}});
            const auto perms = io::read_permutations_file(em_in);
            const PermutonGrid g = empirical_intensity(perms, em_grid);
            auto out = open_out(em_out);
            io::write_grid_csv(out, g);
            out.close();
            manifest.outputs = {em_out};
            std::cout << "wrote " << em_out << " from " << perms.size() << " permutations\n";
            manifest.wall_time_seconds = timer.seconds();
            manifest.write(em_out + ".manifest.json");
        } else if (*ss) {
            ss_opt.seed = ss_seed;
            ss_opt.excursion.method = ss_method == "rejection" ? ExcursionMethod::rejection : ExcursionMethod::skew_product;
            std::vector<Permutation> patterns;
            for (const auto& p : split_patterns(ss_patterns)) {
                const VincularPattern vp = VincularPattern::parse(p);
                if (!vp.is_classical()) throw InputError("skew-sim summary patterns must be classical");
                patterns.push_back(vp.base());
            }
            if (!(ss_opt.corr > -1.0 && ss_opt.corr < 1.0)) throw InputError("--rho must lie in (-1,1)");
            if (!(ss_opt.q >= 0.0 && ss_opt.q <= 1.0)) throw InputError("--q must lie in [0,1]");
            if (ss_opt.m < 2 || ss_opt.m > ss_opt.n_steps) throw InputError("need 2 <= --grid <= --steps");
            if (ss_opt.n_steps < 100) throw InputError("--steps must be >= 100");
            if (ss_opt.replicas < 1) throw InputError("--replicas must be >= 1");
            if (ss_samples < 100) throw InputError("--samples must be >= 100");
            manifest.subcommand = "skew-sim";
            manifest.seed = ss_seed;
            manifest.parameters.update({{"rho", ss_opt.corr}, {"q", ss_opt.q}, {"steps", ss_opt.n_steps},
                                        {"grid", ss_opt.m}, {"replicas", ss_opt.replicas}, {"excursion", ss_method},
                                        {"patterns", ss_patterns}, {"samples", ss_samples}});
            const auto reps = simulate_skew_permuton(ss_opt);
            PermutonGrid pooled(reps.front().grid.resolution());
            for (const auto& est : reps) {
                for (int r = 0; r < pooled.resolution(); ++r) {
                    for (int c = 0; c < pooled.resolution(); ++c) pooled.at(r, c) += est.grid.at(r, c);
                }
            }
            pooled.normalize();
            io::SkewSummary summary{ss_opt.corr, ss_opt.q, ss_opt.n_steps, ss_opt.m, ss_opt.replicas, {}};
            for (std::size_t i = 0; i < patterns.size(); ++i) {
                const OccEstimate e = estimate_occ(std::span<const SkewPermutonEstimate>(reps), patterns[i], ss_samples,
                                                   mix64(ss_seed + 1000 + i));
                std::string key;
                for (int v : patterns[i].values()) key += std::to_string(v);
                summary.occ_estimates[key] = {e.proportion, e.stderr_};
            }
            auto grid_out = open_out(ss_out + ".csv");
            io::write_grid_csv(grid_out, pooled);
            grid_out.close();
            write_phi_csv(ss_out + ".phi.csv", reps);
            write_text(ss_out + ".json", io::skew_summary_json(summary));
            manifest.outputs = {ss_out + ".csv", ss_out + ".phi.csv", ss_out + ".json"};
            std::cout << io::skew_summary_json(summary) << '\n';
            manifest.wall_time_seconds = timer.seconds();
            manifest.write(ss_out + ".manifest.json");
        } else if (*oc) {
            const int sources = !oc_in.empty() + !oc_grid.empty() + !oc_phi.empty();
            if (sources != 1) throw InputError("give exactly one of --in, --grid, --phi");
            if (oc_in.empty() && !*oc_seed_opt) throw InputError("--seed is required with --grid or --phi");
            const VincularPattern vp = VincularPattern::parse(oc_pattern);
            manifest.subcommand = "occ";
            manifest.parameters.update({{"pattern", oc_pattern}, {"samples", oc_samples}});
            nlohmann::ordered_json result;
            result["pattern"] = oc_pattern;
            if (!oc_in.empty()) {
                manifest.parameters.update({{"in", oc_in}, {"in_sha256", cli::sha256_file(oc_in)}});
                const auto perms = io::read_permutations_file(oc_in);
                if (perms.empty()) throw InputError(oc_in + " holds no permutations");
                double sum = 0.0;
                for (const auto& p : perms) {
                    sum += vp.is_classical() ? count_pattern(vp.base(), p).proportion() : (contains_vincular(p, vp) ? 1.0 : 0.0);
                }
                result[vp.is_classical() ? "mean_proportion" : "fraction_containing"] = sum / static_cast<double>(perms.size());
                result["permutations"] = perms.size();
            } else {
                if (!vp.is_classical()) throw InputError("vincular patterns need permutations (--in)");
                if (oc_samples < 100) throw InputError("--samples must be >= 100");
                manifest.seed = oc_seed;
                OccEstimate e;
                if (!oc_grid.empty()) {
                    manifest.parameters.update({{"grid", oc_grid}, {"grid_sha256", cli::sha256_file(oc_grid)}});
                    e = estimate_occ(io::read_grid_csv_file(oc_grid), vp.base(), oc_samples, oc_seed);
                } else {
                    manifest.parameters.update({{"phi", oc_phi}, {"phi_sha256", cli::sha256_file(oc_phi)}});
                    const auto reps = read_phi_csv(oc_phi);
                    e = estimate_occ(std::span<const SkewPermutonEstimate>(reps), vp.base(), oc_samples, oc_seed);
                }
                result["proportion"] = e.proportion;
                result["stderr"] = e.stderr_;
                result["samples"] = e.samples;
                result["tie_resamples"] = e.resamples;
            }
            manifest.wall_time_seconds = timer.seconds();
            if (!oc_manifest.empty()) manifest.write(oc_manifest);
            result["manifest"] = manifest.to_json();
            std::cout << result.dump(2) << '\n';
        } else if (*cm) {
            const ConePoint z = parse_cone_point(cm_z);
            if (!in_open_cone(z.x, z.y)) throw InputError("--z must lie strictly inside the pi/3 cone");
            if (!(cm_step > 0.0 && cm_step <= 1e-2)) throw InputError("--step must lie in (0, 1e-2]");
            if (cm_paths < 10'000) throw InputError("--paths must be >= 1e4");
            std::vector<double> t_edges = default_t_edges(), r_edges = default_r_edges();
            if (cm_bins != "default") {
                const auto nb = parse_list(cm_bins);
                if (nb.size() != 2 || nb[0] < 1 || nb[1] < 1) throw InputError("--bins must be 'default' or 'NT,NR'");
                t_edges.clear();
                r_edges.clear();
                for (int i = 0; i <= static_cast<int>(nb[0]); ++i) t_edges.push_back(2.0 * i / nb[0]);
                for (int i = 0; i <= static_cast<int>(nb[1]); ++i) r_edges.push_back(3.0 * i / nb[1]);
            }
            manifest.subcommand = "cone-mc";
            manifest.seed = cm_seed;
            manifest.parameters.update({{"z", {z.x, z.y}}, {"step", cm_step}, {"paths", cm_paths}, {"bins", cm_bins},
                                        {"bridge_correction", !cm_no_bridge}});
            ExitOptions opts;
            opts.bridge_correction = !cm_no_bridge;
            const JointHistogram hist = mc_joint_histogram(z, cm_step, cm_paths, t_edges, r_edges, cm_seed, opts);
            const HistogramReport report = compare_histogram(hist, z);
            auto csv = open_out(cm_out + ".csv");
            io::write_histogram_csv(csv, report);
            csv.close();
            write_text(cm_out + ".json", io::histogram_report_json(hist, report));
            manifest.outputs = {cm_out + ".csv", cm_out + ".json"};
            std::cout << io::histogram_report_json(hist, report) << '\n';
            manifest.wall_time_seconds = timer.seconds();
            manifest.write(cm_out + ".manifest.json");
        } else if (*vf) {
            verify::Options vo;
            vo.suite = vf_suite == "full" ? verify::Suite::full : verify::Suite::quick;
            vo.seed = vf_seed;
            vo.only = vf_only;
            for (int id : vo.only) {
                if (id < 1 || id > verify::kCriteria) throw InputError("--only ids must lie in 1.." + std::to_string(verify::kCriteria));
            }
            const auto results = verify::run(vo, [](const verify::CriterionResult& r) {
                std::cout << verify::format_line(r) << std::endl;
            });
            if (!vf_json.empty()) write_text(vf_json, verify::to_json(results, vo.suite));
            const bool all = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
            std::cout << (all ? "all checks passed" : "some checks FAILED") << '\n';
            return all ? kOk : kVerification;
        }
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInput;
    } catch (const CapabilityError& e) {
        std::cerr << "capability error: " << e.what() << '\n';
        return kCapability;
    } catch (const AccuracyError& e) {
        std::cerr << "accuracy error: " << e.what() << " (best estimate " << e.estimate() << ", error bound "
                  << e.error_bound() << ")\n";
        return kAccuracy;
    }
    return kOk;
}
