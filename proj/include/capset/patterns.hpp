#ifndef CAPSET_PATTERNS_HPP
#define CAPSET_PATTERNS_HPP

#include "capset/modelset.hpp"

#include <cstdint>
#include <vector>

namespace capset {

// Canonical key for a local configuration: the sorted integer coordinates of
// the lattice points whose physical parts fall within distance r, always
// including the origin.
struct PatternKey {
    std::vector<IVec> members; // sorted lexicographically, origin present

    bool operator==(const PatternKey& other) const;
    bool operator<(const PatternKey& other) const;
};

struct AcceptanceDomain {
    PatternKey pattern;
    std::vector<Region> cells; // half-open pieces partitioning the domain
    double volume = 0.0;
    double volume_stderr = 0.0; // nonzero only for Monte Carlo classification
};

// lattice points with |pi_down gamma| < r and pi_left gamma inside the
// window difference set (anything else cannot change membership)
std::vector<LatticePoint> gamma_r(const Lattice& lattice, const SplitSpace& split,
                                  double r, const Region& window);

// Exact cell decomposition of the window by translated boundary coordinates;
// each cell carries a constant pattern and the domains partition the window.
// Box and interval-union windows only; ball windows in dimension >= 2 are
// classified by Monte Carlo sampling.
std::vector<AcceptanceDomain> acceptance_domains(const ModelSetSpec& spec, double r,
                                                 int mc_samples = 0,
                                                 std::uint64_t seed = 0);

double pattern_frequency(const AcceptanceDomain& domain, const Lattice& lattice);

std::vector<std::pair<double, std::size_t>> complexity(const ModelSetSpec& spec,
                                                       const std::vector<double>& r_grid);

} // namespace capset

#endif
