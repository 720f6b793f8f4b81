#include "capset/variance.hpp"
#include "capset/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace capset {

namespace {

constexpr double kPi = std::numbers::pi;

struct FactorSum {
    double value = 0.0;
    double tail = 0.0;
    std::int64_t points = 0;
};

// sum over a full-rank factor lattice of |F chi(scale * eta)|^2, including
// eta = 0, with a certified tail
FactorSum factor_sum(const Lattice& factor, const Region& region, double scale,
                     double tolerance, std::int64_t max_points) {
    IndicatorEnvelope env = indicator_envelope(region);
    double vol = region.volume();
    AxisEnvelope axis{vol * vol,
                      {{(env.amplitude / vol) * (env.amplitude / vol), scale,
                        2.0 * env.order}}};
    double slack = factor.cell_radius();
    double density = 1.0 / factor.covolume();
    double radius = 8.0;
    auto tail_at = [&](double R) {
        return 10.0 * density * radial_tail_integral(factor.dim(), R, axis, slack);
    };
    if (!std::isfinite(tail_at(radius)) || !std::isfinite(radial_full_integral(factor.dim(), axis, slack)))
        throw NumericalError("nv_diffraction: envelope not integrable for this region class");
    while (tail_at(radius) > tolerance) {
        radius *= 1.3;
        if (ball_point_estimate(factor, radius) > (double)max_points)
            throw BudgetError("nv_diffraction: tolerance unreachable within the dual point budget");
    }
    FactorSum out;
    out.tail = tail_at(radius);
    Vec zero = Vec::Zero(factor.dim());
    double v0 = std::abs(fourier_indicator(region, zero));
    out.value = v0 * v0;
    std::int64_t n = 0;
    out.value += ball_sum(factor, radius, 1,
                          [&](const Vec& p) {
                              double m = std::abs(fourier_indicator(region, Vec(scale * p)));
                              return m * m;
                          },
                          &n);
    out.points = n + 1;
    return out;
}

} // namespace

DiffractionResult nv_diffraction(const Lattice& lattice, const SplitSpace& split,
                                 const Region& search, const Region& window, double t,
                                 double tolerance, int threads,
                                 std::int64_t max_dual_points) {
    if (split.dim() != lattice.dim())
        throw ConfigError("nv_diffraction: split does not match lattice");
    if (!(window.volume() > 0)) throw ConfigError("nv_diffraction: window needs volume");
    if (!(t > 0) || !(tolerance > 0)) throw ConfigError("nv_diffraction: bad parameters");

    const double covol = lattice.covolume();
    const double prefactor = std::pow(t, 2.0 * split.d_down) / (covol * covol);
    Lattice dual = lattice.dual();

    DiffractionResult out;

    if (lattice.splits_as_product(split)) {
        // the dual of a product lattice is the product of the factor duals;
        // the double sum factors exactly
        Lattice dual_down = dual.down_factor(split);
        Lattice dual_left = dual.left_factor(split);
        // split the tolerance between the factor tails
        double tol_raw = tolerance / prefactor;
        IndicatorEnvelope es = indicator_envelope(search);
        IndicatorEnvelope ew = indicator_envelope(window);
        double vs = search.volume(), vw = window.volume();
        AxisEnvelope axis_down{vs * vs,
                               {{(es.amplitude / vs) * (es.amplitude / vs), t,
                                 2.0 * es.order}}};
        AxisEnvelope axis_left{vw * vw,
                               {{(ew.amplitude / vw) * (ew.amplitude / vw), 1.0,
                                 2.0 * ew.order}}};
        double bound_down = std::abs(fourier_indicator(search, Vec(Vec::Zero(split.d_down))));
        bound_down = bound_down * bound_down +
                     radial_full_integral(split.d_down, axis_down, dual_down.cell_radius()) /
                         dual_down.covolume();
        double bound_left = std::abs(fourier_indicator(window, Vec(Vec::Zero(split.d_left))));
        bound_left = bound_left * bound_left +
                     radial_full_integral(split.d_left, axis_left, dual_left.cell_radius()) /
                         dual_left.covolume();
        FactorSum sd = factor_sum(dual_down, search, t, 0.5 * tol_raw / bound_left,
                                  max_dual_points);
        FactorSum sl = factor_sum(dual_left, window, 1.0, 0.5 * tol_raw / bound_down,
                                  max_dual_points);
        double v_down = std::abs(fourier_indicator(search, Vec(Vec::Zero(split.d_down))));
        double v_left = std::abs(fourier_indicator(window, Vec(Vec::Zero(split.d_left))));
        out.value = prefactor * (sd.value * sl.value -
                                 v_down * v_down * v_left * v_left);
        out.tail_bound = prefactor * (sd.tail * bound_left + sl.tail * bound_down);
        out.truncation_radius = 0.0;
        out.dual_points = sd.points + sl.points;
        return out;
    }

    IndicatorEnvelope es = indicator_envelope(search);
    IndicatorEnvelope ew = indicator_envelope(window);
    double vs = search.volume(), vw = window.volume();
    AxisEnvelope axis_down{vs * vs,
                           {{(es.amplitude / vs) * (es.amplitude / vs), t, 2.0 * es.order}}};
    AxisEnvelope axis_left{vw * vw,
                           {{(ew.amplitude / vw) * (ew.amplitude / vw), 1.0,
                             2.0 * ew.order}}};

    double tol_raw = tolerance / prefactor;
    double T = 8.0;
    while (dual_tail_bound(dual, split, T, axis_down, axis_left) > tol_raw) {
        T *= 1.3;
        if (ball_point_estimate(dual, T) > (double)max_dual_points)
            throw BudgetError("nv_diffraction: tolerance unreachable within the dual point budget");
    }
    out.tail_bound = prefactor * dual_tail_bound(dual, split, T, axis_down, axis_left);
    out.truncation_radius = T;

    std::int64_t n = 0;
    double raw = ball_sum(dual, T, threads,
                          [&](const Vec& xi) {
                              double fd = std::abs(fourier_indicator(
                                  search, Vec(t * xi.head(split.d_down))));
                              double fl = std::abs(
                                  fourier_indicator(window, Vec(xi.tail(split.d_left))));
                              return fd * fd * fl * fl;
                          },
                          &n);
    out.value = prefactor * raw;
    out.dual_points = n;
    return out;
}

DiffractionResult nv_diffraction_truncated(const Lattice& lattice, const SplitSpace& split,
                                           const Region& search, const Region& window,
                                           double t, double radius, int threads) {
    if (split.dim() != lattice.dim())
        throw ConfigError("nv_diffraction_truncated: split does not match lattice");
    if (!(t > 0) || !(radius > 0))
        throw ConfigError("nv_diffraction_truncated: bad parameters");
    const double covol = lattice.covolume();
    const double prefactor = std::pow(t, 2.0 * split.d_down) / (covol * covol);
    std::int64_t n = 0;
    double raw = ball_sum(lattice.dual(), radius, threads,
                          [&](const Vec& xi) {
                              double fd = std::abs(fourier_indicator(
                                  search, Vec(t * xi.head(split.d_down))));
                              double fl = std::abs(
                                  fourier_indicator(window, Vec(xi.tail(split.d_left))));
                              return fd * fd * fl * fl;
                          },
                          &n);
    DiffractionResult out;
    out.value = prefactor * raw;
    out.truncation_radius = radius;
    out.tail_bound = std::numeric_limits<double>::infinity();
    out.dual_points = n;
    return out;
}

MonteCarloMoments nv_montecarlo(const ModelSetSpec& spec, double t, int n_samples,
                                std::uint64_t seed, int threads) {
    spec.validate();
    if (n_samples < 100) throw ConfigError("nv_montecarlo: needs at least 100 samples");

    const std::int64_t n = n_samples;
    constexpr std::int64_t kChunk = 256;
    std::int64_t chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> s1((std::size_t)chunks, 0.0), s2((std::size_t)chunks, 0.0),
        s4((std::size_t)chunks, 0.0), sa((std::size_t)chunks, 0.0),
        sa2((std::size_t)chunks, 0.0);

    auto run_chunk = [&](std::int64_t c) {
        double a1 = 0, a2 = 0, a4 = 0, b1 = 0, b2 = 0;
        ModelSetSpec local = spec;
        for (std::int64_t i = c * kChunk; i < std::min(n, (c + 1) * kChunk); ++i) {
            local.shift = spec.lattice.sample_fundamental_one(seed, (std::uint64_t)i);
            CountReport rep = count(local, t);
            double d = rep.discrepancy;
            a1 += d;
            a2 += d * d;
            a4 += d * d * d * d;
            b1 += std::abs(d);
            b2 += d * d;
        }
        s1[(std::size_t)c] = a1;
        s2[(std::size_t)c] = a2;
        s4[(std::size_t)c] = a4;
        sa[(std::size_t)c] = b1;
        sa2[(std::size_t)c] = b2;
    };
    if (threads <= 1 || chunks <= 1) {
        for (std::int64_t c = 0; c < chunks; ++c) run_chunk(c);
    } else {
        std::atomic<std::int64_t> next{0};
        auto worker = [&] {
            while (true) {
                std::int64_t c = next.fetch_add(1);
                if (c >= chunks) return;
                run_chunk(c);
            }
        };
        std::vector<std::thread> pool;
        for (int i = 0; i < std::min<int>(threads, (int)chunks); ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    double m1 = pairwise_sum(s1) / n;
    double m2 = pairwise_sum(s2) / n;
    double m4 = pairwise_sum(s4) / n;
    double ma = pairwise_sum(sa) / n;
    double ma2 = pairwise_sum(sa2) / n;

    MonteCarloMoments out;
    out.n_samples = n_samples;
    out.seed = seed;
    out.mean = m1;
    out.mean_stderr = std::sqrt(std::max(m2 - m1 * m1, 0.0) / n);
    out.nv = m2;
    out.nv_stderr = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
    double covol = spec.lattice.covolume();
    out.l1 = covol * ma;
    out.l1_stderr = covol * std::sqrt(std::max(ma2 - ma * ma, 0.0) / n);
    return out;
}

std::complex<double> fourier_coefficient(const Lattice& lattice, const SplitSpace& split,
                                         const Region& search, const Region& window,
                                         double t, const Vec& dual_point) {
    if (dual_point.size() != split.dim())
        throw ConfigError("fourier_coefficient: dimension mismatch");
    if (dual_point.norm() == 0.0)
        throw ConfigError("fourier_coefficient: dual point must be nonzero (the zero mode vanishes)");
    (void)lattice;
    std::complex<double> fd = fourier_indicator(
        search, Vec(-t * dual_point.head(split.d_down)));
    std::complex<double> fl =
        fourier_indicator(window, Vec(-dual_point.tail(split.d_left)));
    return std::pow(t, split.d_down) * fd * fl;
}

L1Witness l1_lower_witness(const Lattice& lattice, const SplitSpace& split,
                           const Region& search, const Region& window, double t,
                           double dual_search_radius) {
    auto [wc, wh] = window.bounding_box();
    double circum = wh.norm() + wc.norm(); // radius of a ball containing the window
    double cap = 1.0 / (2.0 * circum);
    L1Witness out;
    auto pts = enumerate_in_ball(lattice.dual(), dual_search_radius);
    for (const auto& p : pts) {
        if (split.project_left(p.point).norm() > cap) continue;
        ++out.admissible;
        double mag = std::abs(fourier_coefficient(lattice, split, search, window, t, p.point));
        if (mag > out.best_magnitude) {
            out.best_magnitude = mag;
            out.witness = p;
        }
    }
    if (out.admissible == 0)
        throw NumericalError("l1_lower_witness: no dual point within the window constraint; enlarge the radius or shrink the window");
    return out;
}

std::vector<SpikeRow> liouville_spike_scan(const LiouvilleanLattice& construction,
                                           const SplitSpace& split, const Region& search,
                                           double r, const PsiFunction& f_gauge,
                                           double tolerance, int threads) {
    if (!(r > 0)) throw ConfigError("spike scan: r must be positive");
    if (split.dim() != construction.lattice.dim())
        throw ConfigError("spike scan: split does not match the construction");
    // counting lattice is the dual of the Liouvillean lattice; the variance
    // sum then runs over the Liouvillean lattice itself
    Lattice counting = construction.lattice.dual();
    const LiouvilleData& data = construction.data;

    // window [-r, r] x [-1/2, 1/2)^{d_left - 1} on the internal factor
    Vec wc = Vec::Zero(split.d_left);
    Vec wh = Vec::Constant(split.d_left, 0.5);
    wh[0] = r;
    Region window = Region::box(wc, wh);
    double upsilon_vol = std::pow(1.0, split.d_left - 1); // unit cross section

    double covol = counting.covolume();
    double vol_down = search.volume();

    // exact reduction of r * (q_n - m_n) mod 1 with r = p / 2^53
    auto sin_sq_exact = [&](int level) {
        BigInt k = data.left_component(level);
        bool neg = k < 0;
        if (neg) k = -k;
        int exp2 = 0;
        double mant = std::frexp(r, &exp2); // r = mant * 2^exp2, mant in [0.5, 1)
        BigInt p = BigInt(std::llround(mant * 9007199254740992.0)); // 2^53
        int shift = 53 - exp2;
        // r k = p k / 2^shift; fractional part = (p k mod 2^shift) / 2^shift
        BigInt num = p * k;
        BigInt den = BigInt(1) << (unsigned)shift;
        BigInt rem = num % den;
        double frac = rem.convert_to<double>() / den.convert_to<double>();
        double s = std::sin(2.0 * kPi * frac);
        return s * s;
    };

    std::vector<SpikeRow> rows;
    for (int nlevel = 1; nlevel <= data.depth(); ++nlevel) {
        SpikeRow row;
        row.level = nlevel;
        row.sin_sq = sin_sq_exact(nlevel);
        double fp = data.fractional_part(nlevel);
        row.t = fp > 0.0 ? 1.0 / fp : std::numeric_limits<double>::infinity();
        double f_at_t = std::isfinite(row.t) ? f_gauge(row.t) : std::numeric_limits<double>::infinity();
        // exact right-hand side of the spike inequality
        row.rhs = (std::isfinite(f_at_t) ? f_at_t : 0.0) * vol_down * vol_down *
                  upsilon_vol * upsilon_vol * row.sin_sq /
                  (4.0 * kPi * kPi * covol * covol);
        if (std::isfinite(row.t) && row.t > 0.0) {
            // a partial diffraction sum is a lower bound (nonnegative terms),
            // which is the side of the inequality being certified; the radius
            // covers the witness at this level
            double left_size = std::abs(data.left_component(nlevel).convert_to<double>());
            double radius = std::max(16.0, 1.5 * left_size + 4.0);
            DiffractionResult nv = nv_diffraction_truncated(counting, split, search, window,
                                                            row.t, radius, threads);
            (void)tolerance;
            row.nv = nv.value;
            double psi_t = data.psi(row.t);
            row.ratio = nv.value /
                        (std::pow(row.t, 2.0 * split.d_down) * std::pow(psi_t, -2.0) /
                         f_at_t);
            row.evaluable = true;
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace capset
