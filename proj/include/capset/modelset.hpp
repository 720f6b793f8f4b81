#ifndef CAPSET_MODELSET_HPP
#define CAPSET_MODELSET_HPP

#include "capset/lattice.hpp"

#include <cstdint>
#include <vector>

namespace capset {

// Complete datum of a cut-and-project set: ambient split, lattice, shift,
// window in the internal factor, search region in the physical factor.
struct ModelSetSpec {
    SplitSpace split;
    Lattice lattice;
    Vec shift;     // length split.dim()
    Region window; // in the left factor
    Region search; // in the down factor

    void validate() const;
    double density() const { return window.volume() / lattice.covolume(); }
};

struct CountReport {
    double t = 0.0;
    std::int64_t count = 0;
    double main_term = 0.0;
    double discrepancy = 0.0; // count - main_term, identically
    int boundary_warnings = 0;
};

// physical-space points of the model set clipped to t * search
std::vector<Vec> points(const ModelSetSpec& spec, double t);

CountReport count(const ModelSetSpec& spec, double t);

// count against an arbitrary region in the physical factor (no dilation)
std::pair<std::int64_t, int> count_in_region(const ModelSetSpec& spec, const Region& search);

std::vector<CountReport> discrepancy_sweep(const ModelSetSpec& spec,
                                           const std::vector<double>& t_grid,
                                           int threads = 1);

enum class FitModel {
    PowerLaw,    // envelope |D| <= C t^e, fit e
    PsiRepelled, // envelope |D| <= C psi(t)^{-s} t^{d_down}, fit s (needs psi values)
};

struct ExponentFit {
    double exponent = 0.0; // e, or s for the psi model
    double prefactor = 0.0;
    double residual = 0.0; // rms residual of the log-log fit
    int rows_used = 0;
    int rows_dropped = 0; // rows with discrepancy exactly zero
};

ExponentFit fit_exponent(const std::vector<CountReport>& table, FitModel model,
                         int d_down = 0, const std::vector<double>& psi_values = {});

} // namespace capset

#endif
