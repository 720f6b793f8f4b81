#ifndef CAPSET_LATTICE_HPP
#define CAPSET_LATTICE_HPP

#include "capset/geometry.hpp"
#include "capset/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace capset {

struct LatticePoint {
    IVec coords; // integer coordinates in the basis
    Vec point;   // basis * coords
};

// Full-rank lattice given by basis columns. Preset tags carry exact
// side-data for the number-theoretic constructions; the basis itself is
// always plain doubles.
class Lattice {
public:
    explicit Lattice(Mat basis, std::string preset_tag = "");

    static Lattice integer_lattice(int d);
    static Lattice golden(); // columns (1,1) and (phi, phibar), covolume sqrt(5)

    const Mat& basis() const { return basis_; }
    const Mat& inverse_basis() const { return inv_basis_; }
    double covolume() const { return covolume_; }
    int dim() const { return static_cast<int>(basis_.rows()); }
    const std::string& preset_tag() const { return preset_tag_; }

    Lattice dual() const; // basis = inverse transpose, covolumes multiply to 1

    Vec point_at(const IVec& coords) const { return basis_ * coords.cast<double>(); }

    // x = basis * coords + remainder, with inverse_basis * remainder in [0,1)^d
    std::pair<IVec, Vec> reduce_to_fundamental(const Vec& x) const;

    // n points basis * u, u uniform on [0,1)^d; deterministic in (seed, index)
    std::vector<Vec> sample_fundamental(int n, std::uint64_t seed) const;
    Vec sample_fundamental_one(std::uint64_t seed, std::uint64_t index) const;

    // circumradius bound for the fundamental cell: half the sum of basis
    // column norms
    double cell_radius() const;

    // true when the basis is block diagonal with respect to the split, so
    // sums over the lattice factor across the two subspaces
    bool splits_as_product(const SplitSpace& split) const;
    Lattice down_factor(const SplitSpace& split) const;
    Lattice left_factor(const SplitSpace& split) const;

private:
    Mat basis_;
    Mat inv_basis_;
    double covolume_ = 1.0;
    std::string preset_tag_;
};

// All gamma with contains(region, gamma + shift); region is the product of a
// region in the down factor and one in the left factor. Lexicographic order
// in the integer coordinates.
struct ProductRegion {
    Region down;
    Region left;
};

std::vector<LatticePoint> enumerate_in(const Lattice& lattice, const ProductRegion& region,
                                       const Vec& shift);

// Counting version; resolves the innermost integer coordinate by a line
// section instead of materialising points. Candidates near the section ends
// are membership-tested individually. Returns (count, grazing_warnings).
std::pair<std::int64_t, int> count_in(const Lattice& lattice, const ProductRegion& region,
                                      const Vec& shift);

// all nonzero gamma with |gamma| <= radius
std::vector<LatticePoint> enumerate_in_ball(const Lattice& lattice, double radius);

// Streamed sum of term(point) over the nonzero lattice points with |point|
// <= radius, without materialising them. Work is split into slabs along the
// first integer coordinate; the reduction order is fixed by the slab index,
// so the result does not depend on the thread count.
double ball_sum(const Lattice& lattice, double radius, int threads,
                const std::function<double(const Vec&)>& term,
                std::int64_t* points_visited = nullptr);

// upper bound on lattice points inside a ball of given radius
double ball_point_estimate(const Lattice& lattice, double radius);

} // namespace capset

#endif
