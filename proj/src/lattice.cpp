#include "capset/lattice.hpp"
#include "capset/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace capset {

namespace {
constexpr double kGrazeTol = 1e-9;
}

Lattice::Lattice(Mat basis, std::string preset_tag)
    : basis_(std::move(basis)), preset_tag_(std::move(preset_tag)) {
    if (basis_.rows() != basis_.cols() || basis_.rows() < 1)
        throw ConfigError("lattice: basis must be square");
    double det = basis_.determinant();
    if (!(std::abs(det) > 0) || !std::isfinite(det))
        throw ConfigError("lattice: basis is singular");
    covolume_ = std::abs(det);
    inv_basis_ = basis_.inverse();
}

Lattice Lattice::integer_lattice(int d) { return Lattice(Mat::Identity(d, d)); }

Lattice Lattice::golden() {
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    const double phibar = 0.5 * (1.0 - std::sqrt(5.0));
    Mat b(2, 2);
    b << 1.0, phi, 1.0, phibar;
    return Lattice(b, "golden");
}

Lattice Lattice::dual() const {
    Mat d = inv_basis_.transpose();
    return Lattice(d, preset_tag_.empty() ? "" : preset_tag_ + "-dual");
}

std::pair<IVec, Vec> Lattice::reduce_to_fundamental(const Vec& x) const {
    Vec u = inv_basis_ * x;
    IVec k(dim());
    for (int i = 0; i < dim(); ++i) k[i] = static_cast<int>(std::floor(u[i]));
    Vec rem = x - basis_ * k.cast<double>();
    // guard against floor landing one off at representation boundaries
    Vec ur = inv_basis_ * rem;
    for (int i = 0; i < dim(); ++i) {
        if (ur[i] < 0.0) {
            k[i] -= 1;
        } else if (ur[i] >= 1.0) {
            k[i] += 1;
        }
    }
    rem = x - basis_ * k.cast<double>();
    return {k, rem};
}

Vec Lattice::sample_fundamental_one(std::uint64_t seed, std::uint64_t index) const {
    CounterRng rng(seed);
    Vec u(dim());
    for (int i = 0; i < dim(); ++i)
        u[i] = rng.uniform(index * static_cast<std::uint64_t>(dim()) + i);
    return basis_ * u;
}

std::vector<Vec> Lattice::sample_fundamental(int n, std::uint64_t seed) const {
    if (n < 1) throw ConfigError("sample_fundamental: n must be >= 1");
    std::vector<Vec> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i)
        out.push_back(sample_fundamental_one(seed, static_cast<std::uint64_t>(i)));
    return out;
}

double Lattice::cell_radius() const {
    double s = 0.0;
    for (int j = 0; j < dim(); ++j) s += basis_.col(j).norm();
    return 0.5 * s;
}

bool Lattice::splits_as_product(const SplitSpace& split) const {
    if (split.dim() != dim()) return false;
    for (int j = 0; j < dim(); ++j) {
        bool hits_down = basis_.col(j).head(split.d_down).cwiseAbs().maxCoeff() > 0;
        bool hits_left = basis_.col(j).tail(split.d_left).cwiseAbs().maxCoeff() > 0;
        if (hits_down && hits_left) return false;
    }
    return true;
}

Lattice Lattice::down_factor(const SplitSpace& split) const {
    Mat sub(split.d_down, split.d_down);
    int c = 0;
    for (int j = 0; j < dim(); ++j) {
        if (basis_.col(j).head(split.d_down).cwiseAbs().maxCoeff() > 0) {
            if (c == split.d_down) throw ConfigError("down_factor: basis does not split");
            sub.col(c++) = basis_.col(j).head(split.d_down);
        }
    }
    if (c != split.d_down) throw ConfigError("down_factor: basis does not split");
    return Lattice(sub);
}

Lattice Lattice::left_factor(const SplitSpace& split) const {
    Mat sub(split.d_left, split.d_left);
    int c = 0;
    for (int j = 0; j < dim(); ++j) {
        if (basis_.col(j).tail(split.d_left).cwiseAbs().maxCoeff() > 0) {
            if (c == split.d_left) throw ConfigError("left_factor: basis does not split");
            sub.col(c++) = basis_.col(j).tail(split.d_left);
        }
    }
    if (c != split.d_left) throw ConfigError("left_factor: basis does not split");
    return Lattice(sub);
}

namespace {

struct IntegerBox {
    std::vector<std::int64_t> lo, hi; // inclusive ranges
};

// integer coordinate ranges covering {n : basis n + shift in bounding box}
IntegerBox coordinate_box(const Lattice& lat, const Vec& bb_center, const Vec& bb_half,
                          const Vec& shift) {
    const int d = lat.dim();
    Vec mapped = lat.inverse_basis() * (bb_center - shift);
    IntegerBox box;
    box.lo.resize(d);
    box.hi.resize(d);
    for (int i = 0; i < d; ++i) {
        double spread = 0.0;
        for (int j = 0; j < d; ++j) spread += std::abs(lat.inverse_basis()(i, j)) * bb_half[j];
        box.lo[i] = static_cast<std::int64_t>(std::floor(mapped[i] - spread - 1e-9)) - 1;
        box.hi[i] = static_cast<std::int64_t>(std::ceil(mapped[i] + spread + 1e-9)) + 1;
    }
    return box;
}

bool product_contains(const ProductRegion& region, const SplitSpace& split, const Vec& y) {
    return region.down.contains(y.head(split.d_down)) &&
           region.left.contains(y.tail(split.d_left));
}

SplitSpace region_split(const ProductRegion& region) {
    return SplitSpace(region.down.dim, region.left.dim);
}

} // namespace

std::vector<LatticePoint> enumerate_in(const Lattice& lattice, const ProductRegion& region,
                                       const Vec& shift) {
    SplitSpace split = region_split(region);
    if (split.dim() != lattice.dim())
        throw ConfigError("enumerate_in: region dimension does not match lattice");
    auto [cd, hd] = region.down.bounding_box();
    auto [cl, hl] = region.left.bounding_box();
    Vec bb_c = split.assemble(cd, cl);
    Vec bb_h = split.assemble(hd, hl);
    // the membership test is on gamma + shift, so the box covers region - shift
    IntegerBox box = coordinate_box(lattice, bb_c, bb_h, shift);

    const int d = lattice.dim();
    std::vector<LatticePoint> out;
    IVec n(d);
    std::vector<std::int64_t> cur(box.lo);
    while (true) {
        for (int i = 0; i < d; ++i) n[i] = static_cast<int>(cur[i]);
        Vec p = lattice.point_at(n);
        if (product_contains(region, split, p + shift)) out.push_back({n, p});
        int i = d - 1;
        while (i >= 0) {
            if (++cur[i] <= box.hi[i]) break;
            cur[i] = box.lo[i];
            --i;
        }
        if (i < 0) break;
    }
    return out;
}

std::pair<std::int64_t, int> count_in(const Lattice& lattice, const ProductRegion& region,
                                      const Vec& shift) {
    SplitSpace split = region_split(region);
    if (split.dim() != lattice.dim())
        throw ConfigError("count_in: region dimension does not match lattice");
    const int d = lattice.dim();
    auto [cd, hd] = region.down.bounding_box();
    auto [cl, hl] = region.left.bounding_box();
    IntegerBox box = coordinate_box(lattice, split.assemble(cd, cl), split.assemble(hd, hl), shift);

    // resolve the widest integer coordinate analytically, iterate the rest
    int pivot = 0;
    for (int i = 1; i < d; ++i)
        if (box.hi[i] - box.lo[i] > box.hi[pivot] - box.lo[pivot]) pivot = i;
    std::vector<int> outer;
    for (int i = 0; i < d; ++i)
        if (i != pivot) outer.push_back(i);

    const Vec axis = lattice.basis().col(pivot);
    const Vec axis_down = axis.head(split.d_down);
    const Vec axis_left = axis.tail(split.d_left);

    std::int64_t total = 0;
    int grazing = 0;
    IVec n(d);
    std::vector<std::int64_t> cur(outer.size());
    for (std::size_t i = 0; i < outer.size(); ++i) cur[i] = box.lo[outer[i]];

    auto test_candidate = [&](std::int64_t k) {
        n[pivot] = static_cast<int>(k);
        Vec p = lattice.point_at(n);
        Vec y = p + shift;
        bool in = product_contains(region, split, y);
        double bd = std::min(region.down.boundary_distance(y.head(split.d_down)),
                             region.left.boundary_distance(y.tail(split.d_left)));
        if (bd < kGrazeTol) ++grazing;
        return in;
    };

    while (true) {
        for (std::size_t i = 0; i < outer.size(); ++i) n[outer[i]] = static_cast<int>(cur[i]);
        n[pivot] = 0;
        Vec base = lattice.point_at(n) + shift;

        // sections of both factors along the innermost basis direction;
        // intersected pairs are pairwise disjoint in k, the cursor keeps the
        // candidate margins of nearby sections from overlapping
        auto sec_down = region.down.line_sections(base.head(split.d_down), axis_down);
        auto sec_left = region.left.line_sections(base.tail(split.d_left), axis_left);
        std::vector<Interval> sections;
        for (const auto& sd : sec_down)
            for (const auto& sl : sec_left) {
                double lo = std::max(sd.lo, sl.lo);
                double hi = std::min(sd.hi, sl.hi);
                // keep degenerate sections: a half-open boundary can still
                // hold a lattice point exactly on the closed side, and the
                // edge candidates get an exact membership test
                if (hi >= lo) sections.push_back({lo, hi});
            }
        std::sort(sections.begin(), sections.end(),
                  [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        std::int64_t cursor = box.lo[pivot];
        for (const auto& sec : sections) {
            // clamp before casting: sections may carry full-line sentinels
            double lo_c = std::max(sec.lo, (double)(box.lo[pivot] - 3));
            double hi_c = std::min(sec.hi, (double)(box.hi[pivot] + 3));
            if (hi_c < lo_c) continue;
            std::int64_t klo = static_cast<std::int64_t>(std::ceil(lo_c)) - 2;
            std::int64_t khi = static_cast<std::int64_t>(std::floor(hi_c)) + 2;
            klo = std::max(klo, cursor);
            khi = std::min(khi, box.hi[pivot]);
            if (khi < klo) continue;
            cursor = khi + 1;
            // trust the strict interior, test a margin of 3 at each end
            std::int64_t safe_lo = klo + 3;
            std::int64_t safe_hi = khi - 3;
            if (safe_lo <= safe_hi) {
                total += safe_hi - safe_lo + 1;
                for (std::int64_t k = klo; k < safe_lo; ++k)
                    if (test_candidate(k)) ++total;
                for (std::int64_t k = safe_hi + 1; k <= khi; ++k)
                    if (test_candidate(k)) ++total;
            } else {
                for (std::int64_t k = klo; k <= khi; ++k)
                    if (test_candidate(k)) ++total;
            }
        }

        int i = static_cast<int>(outer.size()) - 1;
        while (i >= 0) {
            if (++cur[(std::size_t)i] <= box.hi[outer[(std::size_t)i]]) break;
            cur[(std::size_t)i] = box.lo[outer[(std::size_t)i]];
            --i;
        }
        if (i < 0) break;
    }
    return {total, grazing};
}

std::vector<LatticePoint> enumerate_in_ball(const Lattice& lattice, double radius) {
    const int d = lattice.dim();
    Vec zero = Vec::Zero(d);
    IntegerBox box = coordinate_box(lattice, zero, Vec::Constant(d, radius), zero);
    std::vector<LatticePoint> out;
    IVec n(d);
    std::vector<std::int64_t> cur(box.lo);
    while (true) {
        bool all_zero = true;
        for (int i = 0; i < d; ++i) {
            n[i] = static_cast<int>(cur[i]);
            if (n[i] != 0) all_zero = false;
        }
        if (!all_zero) {
            Vec p = lattice.point_at(n);
            if (p.norm() <= radius) out.push_back({n, p});
        }
        int i = d - 1;
        while (i >= 0) {
            if (++cur[i] <= box.hi[i]) break;
            cur[i] = box.lo[i];
            --i;
        }
        if (i < 0) break;
    }
    return out;
}

double ball_sum(const Lattice& lattice, double radius, int threads,
                const std::function<double(const Vec&)>& term,
                std::int64_t* points_visited) {
    const int d = lattice.dim();
    Vec zero = Vec::Zero(d);
    IntegerBox box = coordinate_box(lattice, zero, Vec::Constant(d, radius), zero);
    const std::int64_t slabs = box.hi[0] - box.lo[0] + 1;
    std::vector<double> partial((std::size_t)std::max<std::int64_t>(slabs, 1), 0.0);
    std::vector<std::int64_t> visited((std::size_t)std::max<std::int64_t>(slabs, 1), 0);

    auto run_slab = [&](std::int64_t slab) {
        double acc = 0.0;
        std::int64_t seen = 0;
        IVec n(d);
        n[0] = static_cast<int>(box.lo[0] + slab);
        std::vector<std::int64_t> cur(std::max(d - 1, 1), 0);
        for (int i = 1; i < d; ++i) cur[(std::size_t)(i - 1)] = box.lo[i];
        while (true) {
            bool all_zero = n[0] == 0;
            for (int i = 1; i < d; ++i) {
                n[i] = static_cast<int>(cur[(std::size_t)(i - 1)]);
                if (n[i] != 0) all_zero = false;
            }
            if (!all_zero) {
                Vec p = lattice.point_at(n);
                if (p.norm() <= radius) {
                    acc += term(p);
                    ++seen;
                }
            }
            if (d == 1) break;
            int i = d - 2;
            while (i >= 0) {
                if (++cur[(std::size_t)i] <= box.hi[i + 1]) break;
                cur[(std::size_t)i] = box.lo[i + 1];
                --i;
            }
            if (i < 0) break;
        }
        partial[(std::size_t)slab] = acc;
        visited[(std::size_t)slab] = seen;
    };

    if (threads <= 1 || slabs < 4) {
        for (std::int64_t s = 0; s < slabs; ++s) run_slab(s);
    } else {
        std::atomic<std::int64_t> next{0};
        auto worker = [&] {
            while (true) {
                std::int64_t s = next.fetch_add(1);
                if (s >= slabs) return;
                run_slab(s);
            }
        };
        std::vector<std::thread> pool;
        for (int i = 0; i < std::min<int>(threads, (int)slabs); ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (points_visited) {
        std::int64_t total = 0;
        for (auto v : visited) total += v;
        *points_visited = total;
    }
    return pairwise_sum(std::move(partial));
}

double ball_point_estimate(const Lattice& lattice, double radius) {
    const int d = lattice.dim();
    double vb = std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
    double r = radius + lattice.cell_radius();
    return vb * std::pow(r, d) / lattice.covolume() + 1.0;
}

} // namespace capset
