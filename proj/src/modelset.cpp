#include "capset/modelset.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace capset {

void ModelSetSpec::validate() const {
    if (split.dim() != lattice.dim())
        throw ConfigError("model set: split dimension does not match lattice");
    if (shift.size() != split.dim())
        throw ConfigError("model set: shift has wrong dimension");
    if (window.dim != split.d_left)
        throw ConfigError("model set: window lives in the left factor");
    if (search.dim != split.d_down)
        throw ConfigError("model set: search region lives in the down factor");
    if (!(window.volume() > 0)) throw ConfigError("model set: window must have volume");
}

std::vector<Vec> points(const ModelSetSpec& spec, double t) {
    if (!(t > 0)) throw ConfigError("points: t must be positive");
    ProductRegion region{spec.search.dilate(t), spec.window};
    auto pts = enumerate_in(spec.lattice, region, -spec.shift);
    std::vector<Vec> out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.push_back(spec.split.project_down(p.point - spec.shift));
    return out;
}

CountReport count(const ModelSetSpec& spec, double t) {
    if (!(t > 0)) throw ConfigError("count: t must be positive");
    ProductRegion region{spec.search.dilate(t), spec.window};
    auto [n, grazing] = count_in(spec.lattice, region, -spec.shift);
    CountReport rep;
    rep.t = t;
    rep.count = n;
    rep.main_term = spec.search.volume() * spec.window.volume() *
                    std::pow(t, spec.split.d_down) / spec.lattice.covolume();
    rep.discrepancy = static_cast<double>(n) - rep.main_term;
    rep.boundary_warnings = grazing;
    return rep;
}

std::pair<std::int64_t, int> count_in_region(const ModelSetSpec& spec, const Region& search) {
    ProductRegion region{search, spec.window};
    return count_in(spec.lattice, region, -spec.shift);
}

std::vector<CountReport> discrepancy_sweep(const ModelSetSpec& spec,
                                           const std::vector<double>& t_grid, int threads) {
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0)) throw ConfigError("sweep: t grid must be positive");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
            throw ConfigError("sweep: t grid must be increasing");
    }
    std::vector<CountReport> out(t_grid.size());
    if (threads <= 1 || t_grid.size() < 2) {
        for (std::size_t i = 0; i < t_grid.size(); ++i) out[i] = count(spec, t_grid[i]);
        return out;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= t_grid.size()) return;
            out[i] = count(spec, t_grid[i]);
        }
    };
    std::vector<std::thread> pool;
    int n = std::min<int>(threads, static_cast<int>(t_grid.size()));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return out;
}

ExponentFit fit_exponent(const std::vector<CountReport>& table, FitModel model, int d_down,
                         const std::vector<double>& psi_values) {
    if (model == FitModel::PsiRepelled && psi_values.size() != table.size())
        throw ConfigError("fit_exponent: psi values must match the table");

    // envelope: running maximum of |discrepancy|
    std::vector<double> x, y;
    double env = 0.0;
    int dropped = 0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        env = std::max(env, std::abs(table[i].discrepancy));
        if (env == 0.0) {
            ++dropped;
            continue;
        }
        double logt = std::log(table[i].t);
        if (model == FitModel::PowerLaw) {
            x.push_back(logt);
            y.push_back(std::log(env));
        } else {
            // log env - d_down log t = log C - s log psi(t)
            x.push_back(-std::log(psi_values[i]));
            y.push_back(std::log(env) - d_down * logt);
        }
    }
    if (x.size() < 5) throw ConfigError("fit_exponent: needs at least 5 usable rows");

    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    if (!(std::abs(denom) > 0)) throw NumericalError("fit_exponent: degenerate abscissae");
    double slope = (n * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / n;
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - slope * x[i] - intercept;
        rss += r * r;
    }
    ExponentFit fit;
    fit.exponent = slope;
    fit.prefactor = std::exp(intercept);
    fit.residual = std::sqrt(rss / n);
    fit.rows_used = static_cast<int>(x.size());
    fit.rows_dropped = dropped;
    return fit;
}

} // namespace capset
