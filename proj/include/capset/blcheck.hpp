#ifndef CAPSET_BLCHECK_HPP
#define CAPSET_BLCHECK_HPP

#include "capset/modelset.hpp"

#include <optional>
#include <vector>

namespace capset {

// Density-fluctuation statistic over translated cubes: the larger of
// (alpha vol) / count and count / (alpha vol), infinite for empty cubes.
double zeta_alpha(const ModelSetSpec& spec, double alpha, const Region& cube);

struct ZAlphaEstimate {
    double value = 0.0;
    IVec argmax; // lexicographically smallest integer translate attaining it
    std::int64_t translates_scanned = 0;
    bool saw_empty_cube = false;
};

// max over integer translates n with |n|_inf <= translate_range of
// zeta_alpha on n + [0, t)^{d_down}; a lower bound for the supremum over all
// translates
ZAlphaEstimate z_alpha_estimate(const ModelSetSpec& spec, double alpha, double t,
                                int translate_range, int threads = 1);

struct BLRow {
    int n = 0;
    double t = 0.0; // 2^n
    double z_estimate = 0.0;
    double log_z = 0.0;
    double partial_sum = 0.0;
    IVec argmax;
    std::int64_t translates_scanned = 0;
};

struct BLReport {
    double alpha = 0.0;
    std::vector<BLRow> rows;
    double last_increment = 0.0;
    bool divergence_flag = false; // increments not shrinking on the scanned range
};

// Partial sums of log Z_alpha(2^n), n = 1..n_max. alpha <= 0 requests the
// exact density vol(window)/covol.
BLReport dyadic_log_sum(const ModelSetSpec& spec, double alpha, int n_max,
                        int translate_range, int threads = 1);

} // namespace capset

#endif
