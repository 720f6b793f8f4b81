#include "capset/patterns.hpp"
#include "capset/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace capset {

namespace {

bool lex_less(const IVec& a, const IVec& b) {
    for (int i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
}

} // namespace

bool PatternKey::operator==(const PatternKey& other) const {
    if (members.size() != other.members.size()) return false;
    for (std::size_t i = 0; i < members.size(); ++i)
        if (members[i] != other.members[i]) return false;
    return true;
}

bool PatternKey::operator<(const PatternKey& other) const {
    std::size_t n = std::min(members.size(), other.members.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (lex_less(members[i], other.members[i])) return true;
        if (lex_less(other.members[i], members[i])) return false;
    }
    return members.size() < other.members.size();
}

std::vector<LatticePoint> gamma_r(const Lattice& lattice, const SplitSpace& split, double r,
                                  const Region& window) {
    if (!(r > 0)) throw ConfigError("gamma_r: r must be positive");
    // bounding radius: |gamma_down| < r and gamma_left within the closed
    // difference-set cover of the window
    auto [wc, wh] = window.bounding_box();
    double left_span = 2.0 * wh.norm() + 1e-9;
    double radius = std::sqrt(r * r + left_span * left_span) + 1e-9;
    std::vector<LatticePoint> out;
    IVec zero = IVec::Zero(lattice.dim());
    out.push_back({zero, Vec::Zero(lattice.dim())});
    for (const auto& p : enumerate_in_ball(lattice, radius)) {
        Vec down = split.project_down(p.point);
        if (!(down.norm() < r)) continue;
        Vec left = split.project_left(p.point);
        bool plausible = true;
        for (int i = 0; i < split.d_left; ++i)
            if (std::abs(left[i]) > 2.0 * wh[i] + 1e-9) plausible = false;
        if (plausible) out.push_back(p);
    }
    std::sort(out.begin(), out.end(), [](const LatticePoint& a, const LatticePoint& b) {
        return lex_less(a.coords, b.coords);
    });
    return out;
}

namespace {

// boundary coordinates of the window along one axis
std::vector<double> axis_boundaries(const Region& window, int axis) {
    std::vector<double> out;
    if (window.kind == RegionKind::Box) {
        out.push_back(window.center[axis] - window.halfwidths[axis]);
        out.push_back(window.center[axis] + window.halfwidths[axis]);
    } else {
        for (const auto& p : window.intervals) {
            out.push_back(p.lo);
            out.push_back(p.hi);
        }
    }
    return out;
}

PatternKey classify(const Vec& x, const std::vector<LatticePoint>& candidates,
                    const SplitSpace& split, const Region& window) {
    PatternKey key;
    for (const auto& g : candidates) {
        Vec shifted = x + split.project_left(g.point);
        if (window.contains(shifted)) key.members.push_back(g.coords);
    }
    return key;
}

std::vector<AcceptanceDomain> domains_monte_carlo(const ModelSetSpec& spec, double r,
                                                  int mc_samples, std::uint64_t seed) {
    if (mc_samples <= 0)
        throw ConfigError("acceptance_domains: ball windows need mc_samples > 0");
    auto candidates = gamma_r(spec.lattice, spec.split, r, spec.window);
    auto [wc, wh] = spec.window.bounding_box();
    double box_vol = 1.0;
    for (int i = 0; i < spec.window.dim; ++i) box_vol *= 2.0 * wh[i];
    CounterRng rng(seed);
    std::map<PatternKey, std::int64_t> hits;
    std::int64_t inside = 0;
    Vec x(spec.window.dim);
    for (int s = 0; s < mc_samples; ++s) {
        for (int i = 0; i < spec.window.dim; ++i)
            x[i] = wc[i] +
                   wh[i] * (2.0 * rng.uniform((std::uint64_t)s * spec.window.dim + i) - 1.0);
        if (!spec.window.contains(x)) continue;
        ++inside;
        ++hits[classify(x, candidates, spec.split, spec.window)];
    }
    std::vector<AcceptanceDomain> out;
    for (const auto& [key, n] : hits) {
        AcceptanceDomain dom;
        dom.pattern = key;
        double p = (double)n / mc_samples;
        dom.volume = p * box_vol;
        dom.volume_stderr = box_vol * std::sqrt(std::max(p * (1 - p), 0.0) / mc_samples);
        out.push_back(std::move(dom));
    }
    (void)inside;
    return out;
}

} // namespace

std::vector<AcceptanceDomain> acceptance_domains(const ModelSetSpec& spec, double r,
                                                 int mc_samples, std::uint64_t seed) {
    spec.validate();
    const Region& window = spec.window;
    if (window.kind == RegionKind::Ball && window.dim >= 2)
        return domains_monte_carlo(spec, r, mc_samples, seed);
    if (window.kind == RegionKind::Ball) {
        // 1-D balls are intervals; fall through with the box treatment
    }
    auto candidates = gamma_r(spec.lattice, spec.split, r, window);

    // per-axis cut coordinates: translated window boundaries
    const int m = window.dim;
    std::vector<std::vector<double>> cuts(m);
    for (int axis = 0; axis < m; ++axis) {
        std::vector<double> bounds;
        if (window.kind == RegionKind::Ball) {
            bounds = {window.center[0] - window.radius, window.center[0] + window.radius};
        } else {
            bounds = axis_boundaries(window, axis);
        }
        std::vector<double>& c = cuts[axis];
        for (const auto& g : candidates) {
            double shift = g.point[spec.split.d_down + axis];
            for (double b : bounds) c.push_back(b - shift);
        }
        for (double b : bounds) c.push_back(b);
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
    }

    // grid cells inside the window, classified at their centers
    std::map<PatternKey, AcceptanceDomain> domains;
    std::vector<std::size_t> idx(m, 0);
    while (true) {
        bool ok = true;
        for (int axis = 0; axis < m; ++axis)
            if (idx[axis] + 1 >= cuts[axis].size()) ok = false;
        if (ok) {
            Vec lo(m), hi(m), mid(m), half(m);
            double vol = 1.0;
            for (int axis = 0; axis < m; ++axis) {
                lo[axis] = cuts[axis][idx[axis]];
                hi[axis] = cuts[axis][idx[axis] + 1];
                mid[axis] = 0.5 * (lo[axis] + hi[axis]);
                half[axis] = 0.5 * (hi[axis] - lo[axis]);
                vol *= hi[axis] - lo[axis];
            }
            if (vol > 0.0 && window.contains(mid)) {
                PatternKey key = classify(mid, candidates, spec.split, window);
                AcceptanceDomain& dom = domains[key];
                if (dom.pattern.members.empty()) dom.pattern = key;
                dom.cells.push_back(Region::box(mid, half));
                dom.volume += vol;
            }
        }
        // advance the multi-index
        int axis = m - 1;
        while (axis >= 0) {
            if (++idx[axis] + 1 < cuts[axis].size()) break;
            idx[axis] = 0;
            --axis;
        }
        if (axis < 0) break;
    }

    std::vector<AcceptanceDomain> out;
    out.reserve(domains.size());
    for (auto& [key, dom] : domains) out.push_back(std::move(dom));
    return out;
}

double pattern_frequency(const AcceptanceDomain& domain, const Lattice& lattice) {
    return domain.volume / lattice.covolume();
}

std::vector<std::pair<double, std::size_t>> complexity(const ModelSetSpec& spec,
                                                       const std::vector<double>& r_grid) {
    for (std::size_t i = 1; i < r_grid.size(); ++i)
        if (!(r_grid[i] > r_grid[i - 1]))
            throw ConfigError("complexity: r grid must be increasing");
    std::vector<std::pair<double, std::size_t>> out;
    for (double r : r_grid) out.emplace_back(r, acceptance_domains(spec, r).size());
    return out;
}

} // namespace capset
