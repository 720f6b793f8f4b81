// Acceptance suite: runs every gate criterion end to end against the bundled
// configs and prints one pass/fail line per criterion.

#include "capset/blcheck.hpp"
#include "capset/config.hpp"
#include "capset/diophantine.hpp"
#include "capset/harmonic.hpp"
#include "capset/patterns.hpp"
#include "capset/rng.hpp"
#include "capset/variance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

using namespace capset;

namespace {

std::string g_config_dir;
int g_failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
    std::printf("%-4s criterion %2d: %-38s (%s) [%.1fs]\n", pass ? "PASS" : "FAIL", number,
                name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void run(int number, const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    auto start = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
        auto [p, d] = body();
        pass = p;
        detail = d;
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(number, name, pass, detail, secs);
}

Vec vec1(double x) {
    Vec v(1);
    v[0] = x;
    return v;
}
Vec vec2(double x, double y) {
    Vec v(2);
    v[0] = x;
    v[1] = y;
    return v;
}

ModelSetSpec golden_spec() {
    return load_config(g_config_dir + "/golden.json").spec;
}

ModelSetSpec zsquare_spec() {
    return load_config(g_config_dir + "/zsquare.json").spec;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// ------------------------------------------------------------ criteria ----

std::pair<bool, std::string> poisson_identity() {
    int checked = 0;
    double worst = 0.0;
    MollifierParams params{0.45, 0.1, 1.0, 0.5};
    for (int lattice_kind = 0; lattice_kind < 2; ++lattice_kind) {
        for (int region_kind = 0; region_kind < 2; ++region_kind) {
            for (double t : {2.0, 5.0, 10.0}) {
                ModelSetSpec spec = lattice_kind == 0 ? zsquare_spec() : golden_spec();
                if (region_kind == 0) {
                    spec.search = Region::ball(vec1(0.0), 1.0);
                    spec.window = Region::ball(vec1(0.1), 0.22);
                } else {
                    spec.search = Region::segment(-0.6, 0.6);
                    spec.window = Region::segment(-0.25, 0.25);
                }
                SmoothedCount direct = smoothed_count(spec, t, params, +1);
                PoissonBreakdown dual = poisson_dual_sum(spec, t, params, +1, 1e-7);
                double residual =
                    std::abs(direct.value - (dual.volume_term + dual.remainder_term));
                worst = std::max(worst, residual / std::max(1e-6, dual.tail_bound));
                if (residual > std::max(1e-6, dual.tail_bound))
                    return {false, "residual " + fmt(residual) + " at t=" + fmt(t)};
                ++checked;
            }
        }
    }
    return {checked == 12, "12 configurations, worst residual/tol " + fmt(worst)};
}

std::pair<bool, std::string> sandwich() {
    CounterRng rng(530);
    std::uint64_t ctr = 0;
    int violations = 0, lower_checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        ModelSetSpec spec = (trial % 2 == 0) ? zsquare_spec() : golden_spec();
        spec.shift = vec2(2 * rng.uniform(ctr++) - 1, 2 * rng.uniform(ctr++) - 1);
        double t = (trial % 3 == 0) ? 2.0 : (trial % 3 == 1) ? 5.0 : 10.0;
        MollifierParams params;
        params.a_down = 0.05 + 0.4 * rng.uniform(ctr++);
        params.a_left = 0.02 + 0.1 * rng.uniform(ctr++);
        CountReport exact = count(spec, t);
        SmoothedCount lower = smoothed_count(spec, t, params, -1);
        SmoothedCount upper = smoothed_count(spec, t, params, +1);
        if (!lower.empty_interior) {
            ++lower_checked;
            if (lower.value > exact.count + 1e-9) ++violations;
        }
        if (upper.value < exact.count - 1e-9) ++violations;
    }
    return {violations == 0,
            "50 configurations, " + std::to_string(lower_checked) + " inner checks, " +
                std::to_string(violations) + " violations"};
}

std::pair<bool, std::string> counting_oracle() {
    struct Case {
        ModelSetSpec spec;
        double t;
        int radius;
    };
    std::vector<Case> cases;
    for (double t : {13.0, 117.0, 1000.0}) {
        cases.push_back({golden_spec(), t, (int)(t) + 30});
        cases.push_back({zsquare_spec(), t, (int)(t) + 30});
    }
    ModelSetSpec shifted = golden_spec();
    shifted.shift = vec2(0.37, -0.81);
    cases.push_back({shifted, 500.0, 530});
    for (auto& [spec, t, radius] : cases) {
        CountReport rep = count(spec, t);
        ProductRegion region{spec.search.dilate(t), spec.window};
        std::int64_t n = 0;
        // oracle: scan the enlarged integer box, membership only
        for (int a = -radius; a <= radius; ++a)
            for (int b = -radius; b <= radius; ++b) {
                IVec coords(2);
                coords << a, b;
                Vec p = spec.lattice.point_at(coords) - spec.shift;
                if (region.down.contains(p.head(1)) && region.left.contains(p.tail(1))) ++n;
            }
        if (rep.count != n)
            return {false, "count " + std::to_string(rep.count) + " vs oracle " +
                               std::to_string(n) + " at t=" + fmt(t)};
    }
    return {true, std::to_string(cases.size()) + " configurations, exact equality"};
}

std::pair<bool, std::string> golden_repellence() {
    int witnesses = 0;
    for (std::int64_t n = -1000; n <= 1000; ++n)
        for (std::int64_t m = -1000; m <= 1000; ++m) {
            if (n == 0 && m == 0) continue;
            std::int64_t form = golden_norm_form(n, m);
            if (form < 1) return {false, "norm form vanished at nonzero point"};
            if (form == 1) ++witnesses;
        }
    // specifically Fibonacci pairs attain it
    std::int64_t a = 1, b = 1;
    int fib = 0;
    for (int k = 0; k < 14; ++k) {
        if (b <= 1000 && golden_norm_form(b, -a) == 1) ++fib;
        std::int64_t next = a + b;
        a = b;
        b = next;
    }
    return {fib >= 5, std::to_string(fib) + " fibonacci witnesses, " +
                          std::to_string(witnesses) + " unit-form points"};
}

std::pair<bool, std::string> zero_mean() {
    int bad = 0;
    for (int cfg = 0; cfg < 20; ++cfg) {
        ModelSetSpec spec = (cfg % 2 == 0) ? zsquare_spec() : golden_spec();
        double t = 2.0 + 0.9 * cfg;
        MonteCarloMoments mc = nv_montecarlo(spec, t, 10000, 11000 + (std::uint64_t)cfg);
        if (std::abs(mc.mean) > 3.0 * mc.mean_stderr + 1e-12) ++bad;
    }
    return {bad == 0, "20 configurations, " + std::to_string(bad) + " outside 3 sigma"};
}

std::pair<bool, std::string> l1_growth() {
    ExperimentConfig cfg = load_config(g_config_dir + "/zcube3.json");
    const ModelSetSpec& spec = cfg.spec;
    std::vector<double> ts;
    for (int i = 0; i < 12; ++i)
        ts.push_back(10.0 * std::pow(20.0, i / 11.0));
    std::vector<CountReport> env_rows;
    for (double t : ts) {
        L1Witness w = l1_lower_witness(spec.lattice, spec.split, spec.search, spec.window, t,
                                       6.0);
        MonteCarloMoments mc = nv_montecarlo(spec, t, 400, 77);
        if (mc.l1 < w.best_magnitude - 3.0 * mc.l1_stderr)
            return {false, "l1 bound violated at t=" + fmt(t)};
        CountReport row; // reuse the envelope fit over the witness magnitudes
        row.t = t;
        row.discrepancy = w.best_magnitude;
        env_rows.push_back(row);
    }
    ExponentFit fit = fit_exponent(env_rows, FitModel::PowerLaw);
    return {fit.exponent >= 0.5 - 0.15,
            "witness exponent " + fmt(fit.exponent) + " (needs >= 0.35)"};
}

std::pair<bool, std::string> diffraction_vs_mc() {
    struct Case {
        ModelSetSpec spec;
        double t;
        double tol;
    };
    std::vector<Case> cases;
    ModelSetSpec z = zsquare_spec();
    z.search = Region::ball(vec1(0.0), 1.0);
    cases.push_back({z, 5.0, 1e-2});
    cases.push_back({z, 7.0, 1e-2});
    ModelSetSpec zbox = zsquare_spec();
    cases.push_back({zbox, 6.0, 1e-2});
    ModelSetSpec zoff = zsquare_spec();
    zoff.window = Region::interval_union({{-0.3, -0.1}, {0.05, 0.3}});
    cases.push_back({zoff, 4.0, 1e-2});
    cases.push_back({golden_spec(), 5.0, 2.5});
    cases.push_back({golden_spec(), 8.0, 4.0});
    int idx = 0;
    double worst = 0.0;
    for (auto& [spec, t, tol] : cases) {
        DiffractionResult diff =
            nv_diffraction(spec.lattice, spec.split, spec.search, spec.window, t, tol);
        MonteCarloMoments mc = nv_montecarlo(spec, t, 10000, 300 + (std::uint64_t)idx);
        if (std::abs(diff.value - mc.nv) > 3.0 * mc.nv_stderr + diff.tail_bound)
            return {false, "disagreement at case " + std::to_string(idx) + ": diff " +
                               fmt(diff.value) + " mc " + fmt(mc.nv) + " sigma " +
                               fmt(mc.nv_stderr)};
        worst = std::max(worst, std::abs(diff.value - mc.nv) /
                                    std::max(3.0 * mc.nv_stderr, 1e-6));
        ++idx;
    }
    return {true, "6 configurations, worst |diff-mc|/3sigma " + fmt(worst)};
}

std::pair<bool, std::string> spike_inequality() {
    ExperimentConfig cfg = load_config(g_config_dir + "/liouville.json");
    if (!cfg.liouville) return {false, "liouville preset missing"};
    double r = 0.29;
    auto rows = liouville_spike_scan(*cfg.liouville, cfg.spec.split, cfg.spec.search, r,
                                     PsiFunction::log_power(1.0, 1.0), 1e-6);
    int evaluable = 0;
    for (const auto& row : rows) {
        if (row.sin_sq < 0.0 || row.sin_sq > 1.0) return {false, "sin^2 out of range"};
        if (!row.evaluable) continue;
        ++evaluable;
        if (row.ratio < row.rhs)
            return {false, "inequality fails at level " + std::to_string(row.level)};
    }
    // exact sine factor cross-check at level 1: q_1 - m_1 = 1
    double expect = std::sin(2.0 * std::numbers::pi * r * 1.0);
    if (std::abs(rows[0].sin_sq - expect * expect) > 1e-12)
        return {false, "sin^2 mismatch at level 1"};
    return {evaluable >= 2, std::to_string(evaluable) + " evaluable rows, depth " +
                                std::to_string(rows.size())};
}

std::pair<bool, std::string> liouville_exactness() {
    LiouvilleData slow = liouville_number(PsiFunction::log_power(1.0, 1.0), 3);
    slow.verify();
    LiouvilleData fast = liouville_number(PsiFunction::power_law(1.0, 1.0), 10);
    fast.verify();
    // round trip through serialised exponents
    for (const LiouvilleData* d : {&slow, &fast}) {
        LiouvilleData copy;
        copy.exponents = d->exponents;
        copy.psi = d->psi;
        copy.a_approx = d->a_approx;
        copy.verify();
    }
    return {slow.exponents == std::vector<std::int64_t>{1, 5, 53} &&
                fast.exponents.back() == 1023,
            "depth 3 slow + depth 10 speed-1, exact verification"};
}

std::pair<bool, std::string> tiling_and_frequencies() {
    CounterRng rng(710);
    ModelSetSpec spec = golden_spec();
    for (int cfg = 0; cfg < 10; ++cfg) {
        double r = 0.5 + 0.35 * cfg;
        double wlo = 0.06 * rng.uniform(2 * cfg);
        double whi = 1.0 - 0.06 * rng.uniform(2 * cfg + 1);
        spec.window = Region::interval_union({{wlo, whi}});
        auto domains = acceptance_domains(spec, r);
        double total = 0.0;
        for (const auto& d : domains) total += d.volume;
        if (std::abs(total - spec.window.volume()) > 1e-12)
            return {false, "tiling defect " + fmt(total - spec.window.volume())};
    }

    // consistency and frequencies on the standard window at t = 1000
    spec = golden_spec();
    double r = 2.0, t = 1000.0;
    auto domains = acceptance_domains(spec, r);
    ProductRegion region{spec.search.dilate(t), spec.window};
    auto lifts = enumerate_in(spec.lattice, region, Vec::Zero(2));
    std::map<PatternKey, int> counts;
    int tested = 0, consistent = 0, grazing = 0;
    for (const auto& lift : lifts) {
        double down = lift.point[0];
        if (down < r || down > t - r) continue;
        Vec x = vec1(lift.point[1]);
        const AcceptanceDomain* found = nullptr;
        double gap = 1e9;
        for (const auto& d : domains)
            for (const auto& cell : d.cells) {
                if (cell.contains(x)) found = &d;
                gap = std::min(gap, cell.boundary_distance(x));
            }
        if (!found) return {false, "point escaped the tiling"};
        ++counts[found->pattern];
        if (gap < 1e-9) {
            ++grazing;
            continue;
        }
        ++tested;
        PatternKey geometric;
        for (const auto& other : lifts)
            if (std::abs(other.point[0] - down) < r)
                geometric.members.push_back(IVec(other.coords - lift.coords));
        std::sort(geometric.members.begin(), geometric.members.end(),
                  [](const IVec& a, const IVec& b) {
                      return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
                  });
        PatternKey expect = found->pattern;
        std::sort(expect.members.begin(), expect.members.end(),
                  [](const IVec& a, const IVec& b) {
                      return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
                  });
        if (geometric == expect) ++consistent;
    }
    if (tested < 100) return {false, "too few interior points"};
    double consistency = (double)consistent / tested;
    if (consistency < 0.99)
        return {false, "consistency " + fmt(consistency) + " below 0.99"};
    for (const auto& d : domains) {
        double expect_count = pattern_frequency(d, spec.lattice) * t;
        double got = counts.count(d.pattern) ? counts[d.pattern] : 0;
        if (std::abs(got - expect_count) / expect_count > 5.0 / std::sqrt(t) + 0.05)
            return {false, "frequency off for a domain: " + fmt(got) + " vs " +
                               fmt(expect_count)};
    }
    return {true, "tiling exact, consistency " + fmt(consistency)};
}

std::pair<bool, std::string> bl_criterion() {
    ModelSetSpec integer_set{SplitSpace(1, 1), Lattice::integer_lattice(2), Vec::Zero(2),
                             Region::segment(-0.5, 0.5), Region::segment(0.0, 1.0)};
    for (double t : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
        ZAlphaEstimate est = z_alpha_estimate(integer_set, 1.0, t, 6);
        if (est.value != 1.0) return {false, "integer lattice Z != 1 at t=" + fmt(t)};
    }
    BLReport golden = dyadic_log_sum(golden_spec(), 0.0, 10, 64);
    if (!(golden.last_increment < 0.01))
        return {false, "golden increment " + fmt(golden.last_increment)};
    if (golden.divergence_flag) return {false, "golden flagged divergent"};
    BLReport off = dyadic_log_sum(golden_spec(), 2.0 * golden_spec().density(), 6, 16);
    if (!off.divergence_flag) return {false, "density mismatch not flagged"};
    return {true, "integer exact, golden increment " + fmt(golden.last_increment) +
                      ", mismatch flagged"};
}

std::pair<bool, std::string> bessel_accuracy() {
    double worst = 0.0;
    int points = 0;
    for (int nu = 0; nu <= 6; ++nu)
        for (int i = 0; i < 143; ++i) {
            double x = 20.0 * (i + 0.5) / 143.0;
            long double half = 0.5L * x;
            long double term = 1.0L;
            for (int k = 1; k <= nu; ++k) term *= half / k;
            long double sum = term;
            long double x2 = half * half;
            for (int k = 1; k <= 40; ++k) {
                term *= -x2 / ((long double)k * (nu + k));
                sum += term;
            }
            worst = std::max(worst, std::abs(bessel_j(nu, x) - (double)sum));
            ++points;
        }
    return {worst <= 1e-10 && points >= 1000,
            std::to_string(points) + " points, worst error " + fmt(worst)};
}

std::pair<bool, std::string> discrepancy_regimes() {
    ModelSetSpec golden = golden_spec();
    std::vector<double> grid;
    for (double t = 10.0; t <= 10000.0; t *= 1.6) grid.push_back(t);
    grid.push_back(10000.0);
    auto rows = discrepancy_sweep(golden, grid);
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, std::abs(r.discrepancy));
    if (worst > 5.0) return {false, "golden discrepancy " + fmt(worst) + " exceeds 5"};

    ModelSetSpec periodic = zsquare_spec();
    std::vector<double> pgrid;
    for (double t = 10.0; t <= 5000.0; t *= 2.0) pgrid.push_back(t);
    ExponentFit fit = fit_exponent(discrepancy_sweep(periodic, pgrid), FitModel::PowerLaw);
    if (fit.exponent < 0.8)
        return {false, "periodic counterexample exponent " + fmt(fit.exponent)};
    return {true, "golden max " + fmt(worst) + ", periodic exponent " + fmt(fit.exponent)};
}

} // namespace

int main(int argc, char** argv) {
    g_config_dir = argc > 1 ? argv[1] : "configs";
    run(1, "dual-space evaluation identity", poisson_identity);
    run(2, "smoothed count sandwich", sandwich);
    run(3, "counting oracle equality", counting_oracle);
    run(4, "golden norm-form repellence", golden_repellence);
    run(5, "torus average of the discrepancy", zero_mean);
    run(6, "l1 lower-bound growth", l1_growth);
    run(7, "diffraction vs monte carlo variance", diffraction_vs_mc);
    run(8, "variance spike inequality", spike_inequality);
    run(9, "exact slow-approximation data", liouville_exactness);
    run(10, "acceptance-domain tiling", tiling_and_frequencies);
    run(11, "density-fluctuation log sums", bl_criterion);
    run(12, "bessel accuracy", bessel_accuracy);
    run(13, "discrepancy growth regimes", discrepancy_regimes);
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all 13 criteria passed\n");
    return 0;
}
