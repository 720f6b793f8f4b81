#include "capset/blcheck.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace capset {

double zeta_alpha(const ModelSetSpec& spec, double alpha, const Region& cube) {
    if (!(alpha > 0)) throw ConfigError("zeta_alpha: alpha must be positive");
    auto [n, grazing] = count_in_region(spec, cube);
    (void)grazing;
    double v = alpha * cube.volume();
    if (n == 0) return std::numeric_limits<double>::infinity();
    return std::max(v / (double)n, (double)n / v);
}

namespace {

bool lex_less(const IVec& a, const IVec& b) {
    for (int i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return a[i] < b[i];
    return false;
}

} // namespace

ZAlphaEstimate z_alpha_estimate(const ModelSetSpec& spec, double alpha, double t,
                                int translate_range, int threads) {
    spec.validate();
    if (translate_range < 1) throw ConfigError("z_alpha_estimate: range must be >= 1");
    if (!(t > 0)) throw ConfigError("z_alpha_estimate: t must be positive");
    const int d = spec.split.d_down;
    const std::int64_t per_axis = 2 * (std::int64_t)translate_range + 1;
    std::int64_t total = 1;
    for (int i = 0; i < d; ++i) total *= per_axis;

    auto cube_at = [&](std::int64_t flat) {
        IVec n(d);
        std::int64_t rest = flat;
        for (int i = d - 1; i >= 0; --i) {
            n[i] = (int)(rest % per_axis) - translate_range;
            rest /= per_axis;
        }
        Vec c(d), h(d);
        for (int i = 0; i < d; ++i) {
            c[i] = n[i] + 0.5 * t;
            h[i] = 0.5 * t;
        }
        return std::make_pair(n, Region::box(c, h));
    };

    std::vector<double> values((std::size_t)total, 0.0);
    auto run = [&](std::int64_t i) {
        auto [n, cube] = cube_at(i);
        values[(std::size_t)i] = zeta_alpha(spec, alpha, cube);
    };
    if (threads <= 1 || total < 64) {
        for (std::int64_t i = 0; i < total; ++i) run(i);
    } else {
        std::atomic<std::int64_t> next{0};
        auto worker = [&] {
            while (true) {
                std::int64_t i = next.fetch_add(1);
                if (i >= total) return;
                run(i);
            }
        };
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    ZAlphaEstimate out;
    out.translates_scanned = total;
    out.value = -std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i < total; ++i) {
        double v = values[(std::size_t)i];
        if (std::isinf(v)) out.saw_empty_cube = true;
        auto [n, cube] = cube_at(i);
        if (v > out.value || (v == out.value && (out.argmax.size() == 0 || lex_less(n, out.argmax)))) {
            out.value = v;
            out.argmax = n;
        }
    }
    return out;
}

BLReport dyadic_log_sum(const ModelSetSpec& spec, double alpha, int n_max,
                        int translate_range, int threads) {
    if (n_max < 3) throw ConfigError("dyadic_log_sum: needs n_max >= 3");
    BLReport report;
    report.alpha = alpha > 0 ? alpha : spec.density();
    double partial = 0.0;
    double prev_increment = std::numeric_limits<double>::infinity();
    bool shrinks = true;
    for (int n = 1; n <= n_max; ++n) {
        double t = std::exp2(n);
        ZAlphaEstimate est = z_alpha_estimate(spec, report.alpha, t, translate_range, threads);
        BLRow row;
        row.n = n;
        row.t = t;
        row.z_estimate = est.value;
        row.log_z = std::log(est.value);
        partial += row.log_z;
        row.partial_sum = partial;
        row.argmax = est.argmax;
        row.translates_scanned = est.translates_scanned;
        report.rows.push_back(row);
        if (n > n_max / 2 && row.log_z > 0.9 * prev_increment && row.log_z > 0.05)
            shrinks = false;
        prev_increment = row.log_z;
        report.last_increment = row.log_z;
    }
    report.divergence_flag = !shrinks || report.last_increment > 0.1;
    return report;
}

} // namespace capset
