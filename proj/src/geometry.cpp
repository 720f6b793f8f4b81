#include "capset/geometry.hpp"
#include "capset/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace capset {

namespace {

double unit_ball_volume(int m) {
    // v_m = pi^{m/2} / Gamma(m/2 + 1)
    return std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m + 1.0);
}

void check_disjoint_sorted(const std::vector<Interval>& parts) {
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (!(parts[i].hi > parts[i].lo))
            throw ConfigError("interval union: empty or reversed interval");
        if (i > 0 && !(parts[i].lo >= parts[i - 1].hi))
            throw ConfigError("interval union: intervals must be sorted and disjoint");
    }
}

// k-th elementary symmetric polynomial of the side lengths, for Steiner
double elementary_symmetric(const std::vector<double>& s, int k) {
    std::vector<double> dp(k + 1, 0.0);
    dp[0] = 1.0;
    for (double x : s)
        for (int j = k; j >= 1; --j) dp[j] += dp[j - 1] * x;
    return dp[k];
}

} // namespace

Region Region::ball(Vec center, double radius) {
    if (!(radius > 0)) throw ConfigError("ball: radius must be positive");
    Region r;
    r.kind = RegionKind::Ball;
    r.dim = static_cast<int>(center.size());
    r.center = std::move(center);
    r.radius = radius;
    return r;
}

Region Region::box(Vec center, Vec halfwidths) {
    if (center.size() != halfwidths.size())
        throw ConfigError("box: center/halfwidth dimension mismatch");
    for (int i = 0; i < halfwidths.size(); ++i)
        if (!(halfwidths[i] > 0)) throw ConfigError("box: halfwidths must be positive");
    Region r;
    r.kind = RegionKind::Box;
    r.dim = static_cast<int>(center.size());
    r.center = std::move(center);
    r.halfwidths = std::move(halfwidths);
    return r;
}

Region Region::interval_union(std::vector<Interval> parts) {
    if (parts.empty()) throw ConfigError("interval union: needs at least one interval");
    std::sort(parts.begin(), parts.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    check_disjoint_sorted(parts);
    Region r;
    r.kind = RegionKind::IntervalUnion;
    r.dim = 1;
    r.intervals = std::move(parts);
    return r;
}

Region Region::segment(double lo, double hi) {
    if (!(hi > lo)) throw ConfigError("segment: needs hi > lo");
    Vec c(1), h(1);
    c[0] = 0.5 * (lo + hi);
    h[0] = 0.5 * (hi - lo);
    return box(c, h);
}

double Region::volume() const {
    switch (kind) {
    case RegionKind::Ball:
        return unit_ball_volume(dim) * std::pow(radius, dim);
    case RegionKind::Box: {
        double v = 1.0;
        for (int i = 0; i < dim; ++i) v *= 2.0 * halfwidths[i];
        return v;
    }
    case RegionKind::IntervalUnion: {
        double v = 0.0;
        for (const auto& p : intervals) v += p.length();
        return v;
    }
    }
    return 0.0;
}

bool Region::contains(const Vec& x) const {
    if (x.size() != dim) throw ConfigError("contains: dimension mismatch");
    switch (kind) {
    case RegionKind::Ball:
        return (x - center).norm() < radius;
    case RegionKind::Box:
        for (int i = 0; i < dim; ++i) {
            double d = x[i] - center[i];
            if (d < -halfwidths[i] || d >= halfwidths[i]) return false;
        }
        return true;
    case RegionKind::IntervalUnion:
        for (const auto& p : intervals)
            if (x[0] >= p.lo && x[0] < p.hi) return true;
        return false;
    }
    return false;
}

double Region::boundary_distance(const Vec& x) const {
    switch (kind) {
    case RegionKind::Ball:
        return std::abs((x - center).norm() - radius);
    case RegionKind::Box: {
        // distance to the boundary of the closed box
        bool inside = true;
        double inner = std::numeric_limits<double>::infinity();
        double outer2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            double d = std::abs(x[i] - center[i]);
            inner = std::min(inner, halfwidths[i] - d);
            if (d > halfwidths[i]) {
                inside = false;
                outer2 += (d - halfwidths[i]) * (d - halfwidths[i]);
            }
        }
        return inside ? inner : std::sqrt(outer2);
    }
    case RegionKind::IntervalUnion: {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : intervals) {
            best = std::min(best, std::abs(x[0] - p.lo));
            best = std::min(best, std::abs(x[0] - p.hi));
        }
        return best;
    }
    }
    return 0.0;
}

Region Region::dilate(double t) const {
    if (!(t > 0)) throw ConfigError("dilate: factor must be positive");
    Region r = *this;
    switch (kind) {
    case RegionKind::Ball:
        r.center = center * t;
        r.radius = radius * t;
        return r;
    case RegionKind::Box:
        r.center = center * t;
        r.halfwidths = halfwidths * t;
        return r;
    case RegionKind::IntervalUnion:
        for (auto& p : r.intervals) {
            p.lo *= t;
            p.hi *= t;
        }
        return r;
    }
    return r;
}

Region Region::inflate(double a) const {
    if (a < 0) throw ConfigError("inflate: distance must be nonnegative");
    Region r = *this;
    switch (kind) {
    case RegionKind::Ball:
        r.radius = radius + a;
        return r;
    case RegionKind::Box:
        r.halfwidths = halfwidths.array() + a;
        return r;
    case RegionKind::IntervalUnion: {
        std::vector<Interval> parts;
        for (const auto& p : intervals) parts.push_back({p.lo - a, p.hi + a});
        // inflation can merge neighbours
        std::vector<Interval> merged;
        for (const auto& p : parts) {
            if (!merged.empty() && p.lo <= merged.back().hi)
                merged.back().hi = std::max(merged.back().hi, p.hi);
            else
                merged.push_back(p);
        }
        r.intervals = std::move(merged);
        return r;
    }
    }
    return r;
}

std::optional<Region> Region::deflate(double a) const {
    if (a < 0) throw ConfigError("deflate: distance must be nonnegative");
    switch (kind) {
    case RegionKind::Ball:
        if (radius - a <= 0) return std::nullopt;
        return ball(center, radius - a);
    case RegionKind::Box: {
        Vec h = halfwidths.array() - a;
        for (int i = 0; i < dim; ++i)
            if (!(h[i] > 0)) return std::nullopt;
        return box(center, h);
    }
    case RegionKind::IntervalUnion: {
        std::vector<Interval> parts;
        for (const auto& p : intervals)
            if (p.hi - a > p.lo + a) parts.push_back({p.lo + a, p.hi - a});
        if (parts.empty()) return std::nullopt;
        return interval_union(parts);
    }
    }
    return std::nullopt;
}

std::pair<Vec, Vec> Region::bounding_box() const {
    switch (kind) {
    case RegionKind::Ball: {
        Vec h = Vec::Constant(dim, radius);
        return {center, h};
    }
    case RegionKind::Box:
        return {center, halfwidths};
    case RegionKind::IntervalUnion: {
        double lo = intervals.front().lo;
        double hi = intervals.back().hi;
        Vec c(1), h(1);
        c[0] = 0.5 * (lo + hi);
        h[0] = 0.5 * (hi - lo);
        return {c, h};
    }
    }
    return {Vec::Zero(dim), Vec::Zero(dim)};
}

std::vector<Interval> Region::line_sections(const Vec& p, const Vec& v) const {
    // solves for real n with p + n v in region
    switch (kind) {
    case RegionKind::Ball: {
        // |p - c + n v|^2 < r^2
        Vec w = p - center;
        double a = v.squaredNorm();
        double b = 2.0 * w.dot(v);
        double c = w.squaredNorm() - radius * radius;
        if (a <= 0) return c < 0 ? std::vector<Interval>{{-1e300, 1e300}} : std::vector<Interval>{};
        double disc = b * b - 4 * a * c;
        if (disc <= 0) return {};
        double sq = std::sqrt(disc);
        return {{(-b - sq) / (2 * a), (-b + sq) / (2 * a)}};
    }
    case RegionKind::Box: {
        double lo = -1e300, hi = 1e300;
        for (int i = 0; i < dim; ++i) {
            double w = p[i] - center[i];
            // -h <= w + n v < h
            if (v[i] == 0.0) {
                if (w < -halfwidths[i] || w >= halfwidths[i]) return {};
            } else {
                double n0 = (-halfwidths[i] - w) / v[i];
                double n1 = (halfwidths[i] - w) / v[i];
                lo = std::max(lo, std::min(n0, n1));
                hi = std::min(hi, std::max(n0, n1));
            }
        }
        if (hi < lo) return {};
        return {{lo, hi}};
    }
    case RegionKind::IntervalUnion: {
        std::vector<Interval> out;
        double w = p[0];
        if (v[0] == 0.0) {
            Vec q(1);
            q[0] = w;
            if (contains(q)) out.push_back({-1e300, 1e300});
            return out;
        }
        for (const auto& part : intervals) {
            double n0 = (part.lo - w) / v[0];
            double n1 = (part.hi - w) / v[0];
            out.push_back({std::min(n0, n1), std::max(n0, n1)});
        }
        std::sort(out.begin(), out.end(),
                  [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        return out;
    }
    }
    return {};
}

double boundary_tube_volume(const Region& region, double r) {
    double outer = region.inflate(r).volume();
    // box inflation is per coordinate; for the Minkowski tube we want the
    // Euclidean Steiner volume, so compute that variant here instead
    if (region.kind == RegionKind::Box) {
        std::vector<double> sides(region.dim);
        for (int i = 0; i < region.dim; ++i) sides[i] = 2.0 * region.halfwidths[i];
        outer = 0.0;
        for (int k = 0; k <= region.dim; ++k)
            outer += elementary_symmetric(sides, region.dim - k) * unit_ball_volume(k) *
                     std::pow(r, k);
    }
    auto inner = region.deflate(r);
    double vin = inner ? inner->volume() : 0.0;
    return outer - vin;
}

std::pair<double, double> boundary_tube_volume_mc(const Region& region, double r,
                                                  int samples, std::uint64_t seed) {
    if (samples <= 0) throw ConfigError("tube volume: mc_samples must be positive");
    auto [c, h] = region.bounding_box();
    Vec hb = h.array() + r;
    double box_vol = 1.0;
    for (int i = 0; i < region.dim; ++i) box_vol *= 2.0 * hb[i];
    CounterRng rng(seed);
    std::int64_t hits = 0;
    Vec x(region.dim);
    for (int s = 0; s < samples; ++s) {
        for (int i = 0; i < region.dim; ++i)
            x[i] = c[i] + hb[i] * (2.0 * rng.uniform(static_cast<std::uint64_t>(s) * region.dim + i) - 1.0);
        double din = region.boundary_distance(x);
        if (din < r) ++hits;
    }
    double p = static_cast<double>(hits) / samples;
    double est = p * box_vol;
    double se = box_vol * std::sqrt(std::max(p * (1 - p), 0.0) / samples);
    return {est, se};
}

MinkowskiProfile minkowski_profile(const Region& region, double s,
                                   const std::vector<double>& radii, int mc_samples,
                                   std::uint64_t seed) {
    if (!(s > 0) || s > region.dim)
        throw ConfigError("minkowski profile: exponent out of range");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0)) throw ConfigError("minkowski profile: radii must be positive");
        if (i > 0 && !(radii[i] < radii[i - 1]))
            throw ConfigError("minkowski profile: radii must be strictly decreasing");
    }
    MinkowskiProfile prof;
    prof.exponent = s;
    prof.radii = radii;
    for (double r : radii) {
        if (mc_samples > 0) {
            auto [v, se] = boundary_tube_volume_mc(region, r, mc_samples, seed);
            prof.ratios.push_back(v / std::pow(r, s));
            prof.stderrs.push_back(se / std::pow(r, s));
        } else {
            prof.ratios.push_back(boundary_tube_volume(region, r) / std::pow(r, s));
            prof.stderrs.push_back(0.0);
        }
    }
    return prof;
}

} // namespace capset
