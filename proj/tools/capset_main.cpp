#include "capset/blcheck.hpp"
#include "capset/config.hpp"
#include "capset/diophantine.hpp"
#include "capset/harmonic.hpp"
#include "capset/patterns.hpp"
#include "capset/variance.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace capset;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_output(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot open output file '" + out_path + "'");
    out << text;
}

std::string coords_string(const IVec& v) {
    std::string s;
    for (int i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(v[i]);
    }
    return s;
}

struct GlobalOptions {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> tolerance;
    int threads = 1;
};

ExperimentConfig load(const GlobalOptions& g) {
    if (g.config_path.empty()) throw ConfigError("--config is required for this command");
    ExperimentConfig cfg = load_config(g.config_path);
    if (g.seed) cfg.seed = *g.seed;
    if (g.tolerance) cfg.tolerance = *g.tolerance;
    return cfg;
}

std::string sweep_csv(const std::vector<CountReport>& rows) {
    std::string text = "t,count,main_term,discrepancy,boundary_warnings\n";
    for (const auto& r : rows)
        text += fmt(r.t) + "," + std::to_string(r.count) + "," + fmt(r.main_term) + "," +
                fmt(r.discrepancy) + "," + std::to_string(r.boundary_warnings) + "\n";
    return text;
}

int run_count(const GlobalOptions& g, double t) {
    ExperimentConfig cfg = load(g);
    CountReport rep = count(cfg.spec, t);
    write_output(g.out_path, sweep_csv({rep}));
    return 0;
}

int run_sweep(const GlobalOptions& g) {
    ExperimentConfig cfg = load(g);
    if (cfg.t_grid.empty()) throw ConfigError("config.t_grid: required for sweep");
    write_output(g.out_path, sweep_csv(discrepancy_sweep(cfg.spec, cfg.t_grid, g.threads)));
    return 0;
}

int run_poisson(const GlobalOptions& g, double t, int sign, double delta, double s_reg,
                double a_down, double a_left) {
    ExperimentConfig cfg = load(g);
    MollifierParams params;
    if (a_down > 0 && a_left > 0) {
        params.a_down = a_down;
        params.a_left = a_left;
        params.delta = delta;
    } else {
        if (!cfg.psi) throw ConfigError("config.psi: required unless --a-down/--a-left given");
        double L = decay_class(cfg.spec.search).order;
        params = choose_params(t, s_reg, *cfg.psi, delta, cfg.spec.split, L);
    }
    SmoothedCount direct = smoothed_count(cfg.spec, t, params, sign);
    PoissonBreakdown dual = poisson_dual_sum(cfg.spec, t, params, sign, cfg.tolerance,
                                             g.threads);
    double total = dual.volume_term + dual.remainder_term;
    double residual = std::abs(direct.value - total);
    json out{{"t", t},
             {"sign", sign},
             {"a_down", params.a_down},
             {"a_left", params.a_left},
             {"direct", direct.value},
             {"volume_term", dual.volume_term},
             {"remainder_term", dual.remainder_term},
             {"truncation_radius", dual.truncation_radius},
             {"tail_bound", dual.tail_bound},
             {"dual_points", dual.dual_points},
             {"residual", residual},
             {"empty_interior", direct.empty_interior || dual.empty_interior}};
    write_output(g.out_path, out.dump(2) + "\n");
    if (!(residual <= std::max(1e-6, dual.tail_bound)) && !direct.empty_interior) {
        std::cerr << "error: 3: poisson identity residual " << fmt(residual)
                  << " exceeds the certified tail bound\n";
        return 3;
    }
    return 0;
}

int run_repellence(const GlobalOptions& g, double radius, int buckets) {
    ExperimentConfig cfg = load(g);
    std::vector<double> epsilons;
    for (int i = 0; i < buckets; ++i) epsilons.push_back(radius * std::pow(0.5, i + 1));
    RepellenceProfile prof =
        repellence_profile(cfg.spec.lattice, cfg.spec.split, epsilons, radius);
    std::string text = "epsilon,min_left,witness_coords,psi_value,margin\n";
    for (const auto& row : prof.rows) {
        double psi_v = cfg.psi ? (*cfg.psi)(1.0 / row.epsilon) : 0.0;
        double margin = cfg.psi && psi_v > 0 ? row.min_left / psi_v : 0.0;
        text += fmt(row.epsilon) + "," + fmt(row.min_left) + "," +
                (row.witness ? coords_string(row.witness->coords) : std::string("none")) +
                "," + fmt(psi_v) + "," + fmt(margin) + "\n";
    }
    write_output(g.out_path, text);
    return 0;
}

int run_liouville(const GlobalOptions& g, const std::string& type, double c, double expo,
                  int depth) {
    PsiFunction psi = type == "power" ? PsiFunction::power_law(c, expo)
                                      : PsiFunction::log_power(c, expo);
    LiouvilleData data = liouville_number(psi, depth);
    json rows = json::array();
    for (int n = 1; n <= data.depth(); ++n) {
        double margin = data.verification_margin(n);
        json row{{"n", n},
                 {"c_n", std::to_string(data.exponents[n - 1])},
                 {"q_n", bigint_to_string(data.q(n))},
                 {"m_n", bigint_to_string(data.m(n))}};
        if (std::isfinite(margin))
            row["verification_margin"] = margin;
        else
            row["verification_margin"] = "unconstrained"; // last level, vacuous
        rows.push_back(row);
    }
    json out{{"psi", psi.describe()}, {"a_approx", data.a_approx}, {"levels", rows}};
    write_output(g.out_path, out.dump(2) + "\n");
    return 0;
}

int run_variance(const GlobalOptions& g, const std::string& mode, double t, int samples,
                 double nv_tolerance) {
    ExperimentConfig cfg = load(g);
    int n = samples > 0 ? samples : cfg.samples;
    double tol = g.tolerance ? *g.tolerance : nv_tolerance;
    std::string text = "t,nv_diff,tail_bound,nv_mc,nv_stderr,l1_mc,mean_mc\n";
    std::optional<DiffractionResult> diff;
    std::optional<MonteCarloMoments> mc;
    if (mode == "diffraction" || mode == "both")
        diff = nv_diffraction(cfg.spec.lattice, cfg.spec.split, cfg.spec.search,
                              cfg.spec.window, t, tol, g.threads);
    if (mode == "mc" || mode == "both")
        mc = nv_montecarlo(cfg.spec, t, n, cfg.seed, g.threads);
    text += fmt(t) + "," + (diff ? fmt(diff->value) : "") + "," +
            (diff ? fmt(diff->tail_bound) : "") + "," + (mc ? fmt(mc->nv) : "") + "," +
            (mc ? fmt(mc->nv_stderr) : "") + "," + (mc ? fmt(mc->l1) : "") + "," +
            (mc ? fmt(mc->mean) : "") + "\n";
    write_output(g.out_path, text);
    return 0;
}

int run_patterns(const GlobalOptions& g, double r, int mc_samples, bool complexity_table,
                 const std::string& r_grid_arg) {
    ExperimentConfig cfg = load(g);
    if (complexity_table) {
        std::vector<double> grid;
        std::stringstream ss(r_grid_arg);
        std::string item;
        while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
        auto rows = complexity(cfg.spec, grid);
        std::string text = "r,patterns\n";
        for (const auto& [rr, nn] : rows)
            text += fmt(rr) + "," + std::to_string(nn) + "\n";
        write_output(g.out_path, text);
        return 0;
    }
    auto domains = acceptance_domains(cfg.spec, r, mc_samples, cfg.seed);
    json arr = json::array();
    for (const auto& dom : domains) {
        json members = json::array();
        for (const auto& mvec : dom.pattern.members) {
            json mj = json::array();
            for (int i = 0; i < mvec.size(); ++i) mj.push_back(mvec[i]);
            members.push_back(mj);
        }
        arr.push_back({{"pattern", members},
                       {"volume", dom.volume},
                       {"frequency", pattern_frequency(dom, cfg.spec.lattice)}});
    }
    write_output(g.out_path, arr.dump(2) + "\n");
    return 0;
}

int run_blsum(const GlobalOptions& g, int n_max, int range, double alpha) {
    ExperimentConfig cfg = load(g);
    BLReport rep = dyadic_log_sum(cfg.spec, alpha, n_max, range, g.threads);
    std::string text = "n,t,Z_estimate,log_Z,partial_sum,argmax\n";
    for (const auto& row : rep.rows)
        text += std::to_string(row.n) + "," + fmt(row.t) + "," + fmt(row.z_estimate) + "," +
                fmt(row.log_z) + "," + fmt(row.partial_sum) + "," +
                coords_string(row.argmax) + "\n";
    text += "# alpha=" + fmt(rep.alpha) +
            " last_increment=" + fmt(rep.last_increment) +
            " divergence_flag=" + (rep.divergence_flag ? "1" : "0") + "\n";
    write_output(g.out_path, text);
    return 0;
}

int run_predict(const GlobalOptions& g, int d_down, int d_left, double s, double mu,
                const std::string& region) {
    PsiFunction psi = PsiFunction::power_law(1.0, mu);
    SearchClass cls = region == "ball" ? SearchClass::Ball : SearchClass::FinitePerimeter;
    PredictedExponent pred = predicted_exponent(d_down, d_left, s, psi, cls);
    write_output(g.out_path, fmt(pred.exponent) + "\n");
    return 0;
}

int run_spike(const GlobalOptions& g, double r, double f_beta) {
    ExperimentConfig cfg = load(g);
    if (!cfg.liouville)
        throw ConfigError("liouville-spike: config must use the liouville lattice preset");
    PsiFunction f_gauge = PsiFunction::log_power(1.0, f_beta);
    auto rows = liouville_spike_scan(*cfg.liouville, cfg.spec.split, cfg.spec.search, r,
                                     f_gauge, cfg.tolerance, g.threads);
    std::string text = "level,t,evaluable,nv,ratio,rhs,sin_sq\n";
    for (const auto& row : rows)
        text += std::to_string(row.level) + "," + fmt(row.t) + "," +
                (row.evaluable ? "1" : "0") + "," + fmt(row.nv) + "," + fmt(row.ratio) +
                "," + fmt(row.rhs) + "," + fmt(row.sin_sq) + "\n";
    write_output(g.out_path, text);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cut-and-project set laboratory: counts, discrepancy, dual sums,"
                 " diophantine diagnostics, variance, patterns"};
    app.require_subcommand(1);
    app.fallthrough(true);

    GlobalOptions g;
    app.add_option("--config", g.config_path, "experiment config (JSON)");
    app.add_option("--out", g.out_path, "output file (stdout when omitted)");
    std::uint64_t seed_opt = 0;
    auto* seed_flag = app.add_option("--seed", seed_opt, "override config seed");
    double tol_opt = 0.0;
    auto* tol_flag = app.add_option("--tolerance", tol_opt, "override config tolerance");
    app.add_option("--threads", g.threads, "worker threads (deterministic output)");

    double t = 10.0;
    auto* c_count = app.add_subcommand("count", "point count at a single dilation; CSV"
                                                " t,count,main_term,discrepancy,boundary_warnings");
    c_count->add_option("--t", t, "dilation parameter")->required();

    auto* c_sweep = app.add_subcommand("sweep", "counts over config t_grid; same CSV schema");

    auto* c_poisson = app.add_subcommand(
        "poisson-check", "direct mollified count vs dual-space evaluation; JSON report");
    double pc_t = 5.0, pc_delta = 0.5, pc_s = 1.0, pc_adown = 0.0, pc_aleft = 0.0;
    int pc_sign = +1;
    c_poisson->add_option("--t", pc_t, "dilation parameter")->required();
    c_poisson->add_option("--sign", pc_sign, "+1 outer, -1 inner approximation");
    c_poisson->add_option("--delta", pc_delta, "balance parameter in (0,1)");
    c_poisson->add_option("--s", pc_s, "window boundary regularity");
    c_poisson->add_option("--a-down", pc_adown, "explicit physical smoothing radius");
    c_poisson->add_option("--a-left", pc_aleft, "explicit internal smoothing radius");

    auto* c_rep = app.add_subcommand("repellence",
                                     "projection gap profile; CSV epsilon,min_left,...");
    double rep_radius = 100.0;
    int rep_buckets = 8;
    c_rep->add_option("--radius", rep_radius, "search radius");
    c_rep->add_option("--buckets", rep_buckets, "number of epsilon buckets");

    auto* c_liou = app.add_subcommand("liouville",
                                      "exact slow-approximation number; JSON with decimal strings");
    std::string liou_type = "logpower";
    double liou_c = 1.0, liou_expo = 1.0;
    int liou_depth = 3;
    c_liou->add_option("--type", liou_type, "gauge type: power | logpower");
    c_liou->add_option("--c", liou_c, "gauge constant");
    c_liou->add_option("--exponent", liou_expo, "gauge exponent (mu or beta)");
    c_liou->add_option("--depth", liou_depth, "number of levels");

    auto* c_var = app.add_subcommand("variance",
                                     "number variance; CSV t,nv_diff,tail_bound,nv_mc,...");
    std::string var_mode = "both";
    double var_t = 5.0;
    int var_samples = 0;
    double var_tol = 1e-2;
    c_var->add_option("--mode", var_mode, "diffraction | mc | both");
    c_var->add_option("--t", var_t, "dilation parameter")->required();
    c_var->add_option("--samples", var_samples, "override config samples");
    c_var->add_option("--nv-tolerance", var_tol,
                      "certified truncation tail for the dual sum (absolute)");

    auto* c_pat = app.add_subcommand("patterns",
                                     "acceptance domains; JSON [{pattern, volume, frequency}]");
    double pat_r = 1.0;
    int pat_mc = 0;
    bool pat_cx = false;
    std::string pat_grid;
    c_pat->add_option("--r", pat_r, "pattern radius");
    c_pat->add_option("--mc-samples", pat_mc, "samples for ball windows");
    c_pat->add_flag("--complexity", pat_cx, "emit pattern counts over --r-grid instead");
    c_pat->add_option("--r-grid", pat_grid, "comma-separated radii for --complexity");

    auto* c_bl = app.add_subcommand("blsum",
                                    "dyadic density-fluctuation log sums; CSV n,t,Z,...");
    int bl_nmax = 8, bl_range = 64;
    double bl_alpha = 0.0;
    c_bl->add_option("--n-max", bl_nmax, "largest dyadic level");
    c_bl->add_option("--range", bl_range, "translate scan range");
    c_bl->add_option("--alpha", bl_alpha, "density parameter (default: exact density)");

    auto* c_pred = app.add_subcommand("predict-exponent",
                                      "discrepancy growth exponent for a power-law gauge");
    int pe_dd = 2, pe_dl = 1;
    double pe_s = 1.0, pe_mu = 1.0;
    std::string pe_region = "ball";
    c_pred->add_option("--d-down", pe_dd, "physical dimension")->required();
    c_pred->add_option("--d-left", pe_dl, "internal dimension")->required();
    c_pred->add_option("--s", pe_s, "window regularity")->required();
    c_pred->add_option("--mu", pe_mu, "gauge speed")->required();
    c_pred->add_option("--region", pe_region, "ball | fp");

    auto* c_spike = app.add_subcommand("liouville-spike",
                                       "variance spikes at the witness scales; CSV");
    double sp_r = 0.3, sp_beta = 1.0;
    c_spike->add_option("--r", sp_r, "window halfwidth along the distinguished axis");
    c_spike->add_option("--f-beta", sp_beta, "divergence gauge exponent f = log(1+t)^beta");

    CLI11_PARSE(app, argc, argv);
    if (*seed_flag) g.seed = seed_opt;
    if (*tol_flag) g.tolerance = tol_opt;

    try {
        if (*c_count) return run_count(g, t);
        if (*c_sweep) return run_sweep(g);
        if (*c_poisson) return run_poisson(g, pc_t, pc_sign, pc_delta, pc_s, pc_adown, pc_aleft);
        if (*c_rep) return run_repellence(g, rep_radius, rep_buckets);
        if (*c_liou) return run_liouville(g, liou_type, liou_c, liou_expo, liou_depth);
        if (*c_var) return run_variance(g, var_mode, var_t, var_samples, var_tol);
        if (*c_pat) return run_patterns(g, pat_r, pat_mc, pat_cx, pat_grid);
        if (*c_bl) return run_blsum(g, bl_nmax, bl_range, bl_alpha);
        if (*c_pred) return run_predict(g, pe_dd, pe_dl, pe_s, pe_mu, pe_region);
        if (*c_spike) return run_spike(g, sp_r, sp_beta);
    } catch (const ConfigError& e) {
        std::cerr << "error: 2: " << e.what() << "\n";
        return 2;
    } catch (const BudgetError& e) {
        std::cerr << "error: 4: " << e.what() << "\n";
        return 4;
    } catch (const NumericalError& e) {
        std::cerr << "error: 3: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: 1: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
