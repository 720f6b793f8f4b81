#ifndef CAPSET_HARMONIC_HPP
#define CAPSET_HARMONIC_HPP

#include "capset/modelset.hpp"
#include "capset/psi.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace capset {

// Transform convention throughout: F f(xi) = integral e(x.xi) f(x) dx with
// e(u) = exp(-2 pi i u). A region translated to center c picks up the phase
// e(c.xi) relative to the centered transform.

double bessel_j(double nu, double x);

std::complex<double> fourier_indicator(const Region& region, const Vec& xi);

// Decay order of |F chi| along rays: (m+1)/2 for balls, 1 for boxes and
// interval unions.
struct DecayClass {
    double order = 1.0;
    const char* tag = "finite-perimeter";
};
DecayClass decay_class(const Region& region);

// certified |F chi(xi)| <= amplitude (1 + |xi|)^{-order}, amplitude from the
// closed-form profile with a safety margin
struct IndicatorEnvelope {
    double amplitude = 0.0;
    double order = 1.0;
};
IndicatorEnvelope indicator_envelope(const Region& region);

// --- mollifier -----------------------------------------------------------
//
// The smoothing kernel is the product over coordinates of the standard bump
// exp(-1/(1-x^2)) normalised to unit mass, scaled per factor by a_down /
// a_left. Its transform factors into 1-D transforms g1, precomputed on
// [0, 200] and interpolated; past the grid the kernel factor is treated as 0
// and the discarded mass is folded into reported tail bounds using the
// empirical envelope |g1(u)| <= C (1+u)^{-12}.

struct MollifierParams {
    double a_down = 0.0;
    double a_left = 0.0;
    double sigma = 1.0;
    double delta = 0.5;
};

double mollifier_fourier_1d(double u);
double mollifier_envelope_constant();
inline constexpr double kMollifierCacheLimit = 200.0;
inline constexpr double kMollifierDecayOrder = 12.0;

double mollifier_fourier(const SplitSpace& split, const MollifierParams& params,
                         const Vec& xi);

// bump CDF on [-1,1], normalised so cdf(1) = 1
double bump_cdf(double x);

// Outer/inner approximation used by the smoothed counts: per-coordinate
// inflation for boxes and interval unions (matching the kernel support
// exactly), metric inflation by a sqrt(m) for balls (covering it).
Region approx_region(const Region& region, double a, int sign);
std::optional<Region> approx_region_inner(const Region& region, double a);

struct SmoothedCount {
    double value = 0.0;
    bool empty_interior = false;
};

// Direct evaluation of the mollified counting sum at every lattice point in
// the inflated region. sign = +1 or -1 selects the outer/inner approximation.
SmoothedCount smoothed_count(const ModelSetSpec& spec, double t,
                             const MollifierParams& params, int sign);

struct PoissonBreakdown {
    double volume_term = 0.0;
    double remainder_term = 0.0;
    double truncation_radius = 0.0;
    double tail_bound = 0.0;
    bool empty_interior = false;
    std::int64_t dual_points = 0;
};

// Same quantity evaluated over the dual lattice: the zero term (volume) plus
// the truncated remainder, with a certified bound on the discarded tail.
PoissonBreakdown poisson_dual_sum(const ModelSetSpec& spec, double t,
                                  const MollifierParams& params, int sign,
                                  double tolerance, int threads = 1,
                                  std::int64_t max_dual_points = 10'000'000);

// Smoothing radii adapted to t and the gauge. Slowly growing psi: sigma = 1,
// a_down = sqrt(t), a_left = psi(t)^{-1+delta}. Speed-mu psi: sigma =
// d_down / (s mu (1-delta)(d_down - L_down + 1) + L_down + (1-delta) d_left mu),
// a_down = t^{1 + sigma mu s (delta - 1)}, a_left = psi(t^sigma)^{-1+delta}.
MollifierParams choose_params(double t, double s, const PsiFunction& psi, double delta,
                              const SplitSpace& split, double L_down);

// --- tail machinery (shared with the variance sums) ----------------------

// One decay factor of a radial envelope, min(1, amp (1 + b u)^{-p}); the cap
// keeps the bound tight near the origin where amp may be large.
struct EnvelopeFactor {
    double amp = 1.0;
    double b = 1.0;
    double p = 1.0;
    double value(double u) const;
};

// amplitude * prod_j factors_j(u) as a radial envelope on one factor space
struct AxisEnvelope {
    double amplitude = 0.0;
    std::vector<EnvelopeFactor> factors;
    double value(double u) const;
};

// integral of env((|u| - slack)+) over {|u| > X} in R^m, infinite if no
// factor decays fast enough
double radial_tail_integral(int m, double X, const AxisEnvelope& env, double slack);
inline double radial_full_integral(int m, const AxisEnvelope& env, double slack) {
    return radial_tail_integral(m, 0.0, env, slack);
}

// certified bound on sum over dual points with |xi| > T of
// down(|xi_down|) * left(|xi_left|), including the dual density and a
// safety factor of 10
double dual_tail_bound(const Lattice& dual, const SplitSpace& split, double T,
                       const AxisEnvelope& down, const AxisEnvelope& left);

} // namespace capset

#endif
