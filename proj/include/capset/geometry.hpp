#ifndef CAPSET_GEOMETRY_HPP
#define CAPSET_GEOMETRY_HPP

#include "capset/types.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace capset {

// Half-open interval [lo, hi).
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

enum class RegionKind { Ball, Box, IntervalUnion };

// Bounded region of a Euclidean factor space. Boundary conventions are fixed
// once and for all so that translated copies tile exactly:
//   Ball           open,  |x - c| < r
//   Box            half-open, lower-closed:  c_i - h_i <= x_i < c_i + h_i
//   IntervalUnion  1-D, disjoint half-open [a, b)
struct Region {
    RegionKind kind = RegionKind::Box;
    int dim = 1;
    Vec center;           // Ball, Box
    double radius = 0.0;  // Ball
    Vec halfwidths;       // Box
    std::vector<Interval> intervals; // IntervalUnion, sorted, disjoint

    static Region ball(Vec center, double radius);
    static Region box(Vec center, Vec halfwidths);
    static Region interval_union(std::vector<Interval> parts);
    // convenience: the 1-D box [lo, hi)
    static Region segment(double lo, double hi);

    double volume() const;
    bool contains(const Vec& x) const;
    // distance from x to the region boundary (>= 0); used for grazing checks
    double boundary_distance(const Vec& x) const;

    // scale about the origin by t > 0
    Region dilate(double t) const;

    // Outer/inner parallel set at distance a >= 0. Balls use metric
    // inflation, boxes and interval unions inflate per coordinate; either
    // structuring element contains the support of the mollifier used at the
    // same scale, which is all the sandwich argument needs, and the result
    // stays within the same closed-form family. The inner set may be empty.
    Region inflate(double a) const;
    std::optional<Region> deflate(double a) const;

    // axis-aligned bounding box (center, halfwidths), a closed cover
    std::pair<Vec, Vec> bounding_box() const;

    // {n : p + n v in region} as a real interval, when the section is an
    // interval (always, except for IntervalUnion with several parts hit).
    // Returns intervals of n; empty vector when the line misses the region.
    std::vector<Interval> line_sections(const Vec& p, const Vec& v) const;
};

struct MinkowskiProfile {
    double exponent = 1.0;       // s
    std::vector<double> radii;   // strictly decreasing
    std::vector<double> ratios;  // vol((boundary)_r) / r^s
    std::vector<double> stderrs; // zero for closed forms
};

// two-sided tube volume of the boundary, vol((dOmega)_r) = vol+ - vol-
double boundary_tube_volume(const Region& region, double r);

// Monte Carlo estimate of the same tube volume by rejection sampling in an
// inflated bounding box; returns (estimate, stderr).
std::pair<double, double> boundary_tube_volume_mc(const Region& region, double r,
                                                  int samples, std::uint64_t seed);

MinkowskiProfile minkowski_profile(const Region& region, double s,
                                   const std::vector<double>& radii,
                                   int mc_samples = 0, std::uint64_t seed = 0);

} // namespace capset

#endif
