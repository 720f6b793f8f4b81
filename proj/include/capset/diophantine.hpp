#ifndef CAPSET_DIOPHANTINE_HPP
#define CAPSET_DIOPHANTINE_HPP

#include "capset/lattice.hpp"
#include "capset/psi.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace capset {

using BigInt = boost::multiprecision::cpp_int;

// ----------------------------------------------------------- repellence --

struct RepellenceRow {
    double epsilon = 0.0;
    double min_left = 0.0; // +inf when no candidate in the bucket
    std::optional<LatticePoint> witness;
};

struct RepellenceProfile {
    std::vector<RepellenceRow> rows;
    double search_radius = 0.0;
};

// For each epsilon, the smallest |pi_left gamma| over nonzero gamma with
// |pi_down gamma| <= epsilon and |gamma| <= search_radius. Vectors lying on
// the internal space (pi_down = 0) are included; they witness failure of
// irrationality. Certificates hold only within the scanned ball.
RepellenceProfile repellence_profile(const Lattice& lattice, const SplitSpace& split,
                                     const std::vector<double>& epsilons,
                                     double search_radius);

struct RepellenceCheck {
    bool holds = false;
    double worst_margin = 0.0; // min over rows of min_left / psi(1/epsilon)
};

RepellenceCheck check_repellent(const RepellenceProfile& profile, const PsiFunction& psi);

// gamma in the lattice with |pi_down gamma| < tol witness failure of
// injectivity; dual vectors with |pi_down| < tol witness failure of density.
// A clean scan is evidence within the radius, not a proof.
struct IrrationalityScan {
    std::vector<LatticePoint> gamma_hits;
    std::vector<LatticePoint> dual_hits;
};

IrrationalityScan irrationality_scan(const Lattice& lattice, const SplitSpace& split,
                                     double search_radius, double tol);

// ------------------------------------------------------------- liouville --

// Binary-exponent data of a = sum 2^{-c_j} with q_n = 2^{c_n}; every stored
// level satisfies psi(||q_n a||^{-1}) >= q_n, verified in exact integer /
// log-domain arithmetic.
struct LiouvilleData {
    std::vector<std::int64_t> exponents; // c_1 < c_2 < ...
    PsiFunction psi;
    double a_approx = 0.0; // nearest double to a

    int depth() const { return static_cast<int>(exponents.size()); }
    BigInt q(int n) const;        // 2^{c_n}, 1-based
    BigInt m(int n) const;        // nearest integer to q_n a
    BigInt left_component(int n) const; // q_n - m_n
    // ||q_n a|| = sum_{j>n} 2^{c_n - c_j}; zero for the last level (a is
    // dyadic at finite depth). Representable in double for the bundled
    // presets.
    double fractional_part(int n) const;
    // margin of the log-domain verification at level n (>= 0 when verified)
    double verification_margin(int n) const;
    void verify() const; // throws NumericalError when any margin is negative
};

// Greedy construction c_{k+1} = c_k + ceil(log2 psi^{-1}(2^{c_k})) + 1.
LiouvilleData liouville_number(const PsiFunction& psi, int depth,
                               std::int64_t bit_budget = (std::int64_t{1} << 32));

// Lattice spanned by {a e_down + e_left, e_down + e_left} on the
// distinguished pair of coordinates, plus an optional block on the remaining
// coordinates. Witness lattice points xi^(n) = q_n (a,1) - m_n (1,1) have
// |xi_down| = ||q_n a|| and |xi_left| = |q_n - m_n| exactly.
struct LiouvilleWitness {
    int level = 0;
    BigInt coeff_a;    // q_n, multiplies the column (a, 1)
    BigInt coeff_unit; // -m_n, multiplies the column (1, 1)
    Vec point;         // float shadow of the exact projections
};

struct LiouvilleanLattice {
    Lattice lattice; // float shadow basis
    LiouvilleData data;
    std::vector<LiouvilleWitness> witnesses;
};

LiouvilleanLattice liouvillean_lattice(const PsiFunction& psi, int depth,
                                       const SplitSpace& split,
                                       const std::optional<Lattice>& tail_lattice,
                                       std::int64_t bit_budget = (std::int64_t{1} << 32));

// ----------------------------------------------------- predicted exponents --

struct PredictedExponent {
    bool power_law = false;
    double exponent = 0.0;      // discrepancy grows like t^exponent (power law)
    double t_power = 0.0;       // slow gauges: C t^{t_power} psi(t)^{psi_power}
    double psi_power = 0.0;
};

enum class SearchClass { Ball, FinitePerimeter };

PredictedExponent predicted_exponent(int d_down, int d_left, double s,
                                     const PsiFunction& psi, SearchClass region_class);

// exact golden-lattice norm form |(n + m phi)(n + m phibar)| = |n^2 + nm - m^2|
std::int64_t golden_norm_form(std::int64_t n, std::int64_t m);

std::string bigint_to_string(const BigInt& v);

} // namespace capset

#endif
