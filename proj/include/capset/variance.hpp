#ifndef CAPSET_VARIANCE_HPP
#define CAPSET_VARIANCE_HPP

#include "capset/diophantine.hpp"
#include "capset/harmonic.hpp"
#include "capset/modelset.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

namespace capset {

// Number variance of the counting discrepancy over the torus of lattice
// translates, normalised by the probability measure of the fundamental cell.

struct DiffractionResult {
    double value = 0.0;
    double truncation_radius = 0.0;
    double tail_bound = 0.0;
    std::int64_t dual_points = 0;
};

DiffractionResult nv_diffraction(const Lattice& lattice, const SplitSpace& split,
                                 const Region& search, const Region& window, double t,
                                 double tolerance, int threads = 1,
                                 std::int64_t max_dual_points = 10'000'000);

// Partial sum over dual points within a fixed radius. Terms are nonnegative,
// so this is always a valid lower bound for the full variance; no tail is
// certified (tail_bound reports infinity).
DiffractionResult nv_diffraction_truncated(const Lattice& lattice, const SplitSpace& split,
                                           const Region& search, const Region& window,
                                           double t, double radius, int threads = 1);

struct MonteCarloMoments {
    double nv = 0.0;       // mean of disc^2
    double nv_stderr = 0.0;
    double l1 = 0.0;       // covolume * mean |disc| (Lebesgue integral over the cell)
    double l1_stderr = 0.0;
    double mean = 0.0;
    double mean_stderr = 0.0;
    int n_samples = 0;
    std::uint64_t seed = 0;
};

MonteCarloMoments nv_montecarlo(const ModelSetSpec& spec, double t, int n_samples,
                                std::uint64_t seed, int threads = 1);

struct VarianceReport {
    double t = 0.0;
    std::optional<DiffractionResult> diffraction;
    std::optional<MonteCarloMoments> mc;
};

// Fourier coefficient of the discrepancy at a nonzero dual point:
// t^{d_down} Fdown chi_search(-t xi_down) Fleft chi_window(-xi_left).
std::complex<double> fourier_coefficient(const Lattice& lattice, const SplitSpace& split,
                                         const Region& search, const Region& window,
                                         double t, const Vec& dual_point);

struct L1Witness {
    double best_magnitude = 0.0;
    LatticePoint witness;
    int admissible = 0; // dual points satisfying the window-size constraint
};

// Largest coefficient magnitude over nonzero dual points within the radius
// whose left part is small against the window circumradius; a certified
// lower bound for the L1 average of the discrepancy.
L1Witness l1_lower_witness(const Lattice& lattice, const SplitSpace& split,
                           const Region& search, const Region& window, double t,
                           double dual_search_radius);

// Ratio table over the witness scales t_n = ||q_n a||^{-1} for a Liouvillean
// construction with window [-r, r] (x an optional cross section).
struct SpikeRow {
    int level = 0;
    double t = 0.0;           // +inf when the scale overflows doubles
    bool evaluable = false;
    double nv = 0.0;          // diffraction value at t (evaluable rows)
    double ratio = 0.0;       // nv / (t^{2 d_down} psi(t)^{-2} f(t)^{-1})
    double rhs = 0.0;         // exact lower bound for the ratio
    double sin_sq = 0.0;      // sin^2(2 pi r (q_n - m_n)), exact reduction
};

std::vector<SpikeRow> liouville_spike_scan(const LiouvilleanLattice& construction,
                                           const SplitSpace& split, const Region& search,
                                           double r, const PsiFunction& f_gauge,
                                           double tolerance, int threads = 1);

} // namespace capset

#endif
