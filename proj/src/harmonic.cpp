#include "capset/harmonic.hpp"
#include "capset/rng.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <thread>

namespace capset {

namespace {

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------- bessel --

// small-argument series, safe for x <= 0.5
double bessel_series_small(double nu, double x) {
    long double half = 0.5L * x;
    long double term = std::pow(half, (long double)nu) / std::tgammal((long double)nu + 1.0L);
    long double sum = term;
    long double x2 = half * half;
    for (int k = 1; k <= 30; ++k) {
        term *= -x2 / (k * (nu + k));
        sum += term;
        if (std::abs((double)term) < 1e-20 * std::abs((double)sum)) break;
    }
    return (double)sum;
}

double spherical_jn(int n, double x) {
    if (x < 0.5) {
        // x^n / (2n+1)!! * (1 - x^2/(2(2n+3)) + ...)
        long double dfact = 1.0L;
        for (int k = 1; k <= n; ++k) dfact *= (2 * k + 1);
        long double x2 = (long double)x * x;
        long double term = 1.0L, sum = 1.0L;
        for (int k = 1; k <= 12; ++k) {
            term *= -x2 / (2.0L * k * (2.0L * (n + k) + 1.0L));
            sum += term;
        }
        return (double)(std::pow((long double)x, n) / dfact * sum);
    }
    long double j0 = std::sin((long double)x) / x;
    if (n == 0) return (double)j0;
    long double j1 = j0 / x - std::cos((long double)x) / x;
    if (n == 1) return (double)j1;
    if (n <= x) {
        long double jm = j0, jc = j1;
        for (int k = 1; k < n; ++k) {
            long double jn = (2.0L * k + 1.0L) / x * jc - jm;
            jm = jc;
            jc = jn;
        }
        return (double)jc;
    }
    // downward recurrence, normalised against the larger of j0, j1
    int start = n + 16 + (int)(2.0 * std::sqrt((double)n));
    long double up = 0.0L, cur = 1e-30L, saved = 0.0L, ref0 = 0.0L, ref1 = 0.0L;
    for (int k = start; k >= 1; --k) {
        long double down = (2.0L * k + 1.0L) / x * cur - up;
        up = cur;
        cur = down;
        if (k - 1 == n) saved = cur;
        if (k - 1 == 1) ref1 = cur;
        if (k - 1 == 0) ref0 = cur;
        if (std::abs(cur) > 1e280L) {
            cur *= 1e-280L;
            up *= 1e-280L;
            saved *= 1e-280L;
            ref1 *= 1e-280L;
        }
    }
    if (std::abs(j0) >= std::abs(j1)) return (double)(saved * (j0 / ref0));
    return (double)(saved * (j1 / ref1));
}

bool bessel_hankel(double nu, double x, double& out) {
    double mu = 4.0 * nu * nu;
    double P = 1.0, Q = 0.0;
    double ak = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    int k = 0;
    double omitted = std::numeric_limits<double>::infinity();
    while (k < 16) {
        ++k;
        double num = mu - (2.0 * k - 1.0) * (2.0 * k - 1.0);
        ak *= num / (k * 8.0 * x);
        double mag = std::abs(ak);
        if (mag >= prev) {
            omitted = prev;
            break;
        }
        prev = mag;
        int r = k % 4;
        if (r == 1) Q += ak;
        else if (r == 2) P -= ak;
        else if (r == 3) Q -= ak;
        else P += ak;
        if (mag < 1e-17) {
            omitted = mag;
            break;
        }
        omitted = mag;
    }
    if (!(omitted < 1e-10)) return false;
    double chi = x - (2.0 * nu + 1.0) * kPi / 4.0;
    out = std::sqrt(2.0 / (kPi * x)) * (P * std::cos(chi) - Q * std::sin(chi));
    return true;
}

double bessel_miller_integer(int nu, double x) {
    double top = std::max((double)nu, x);
    int start = (int)(top + 16 + 2.0 * std::sqrt(top));
    long double up = 0.0L, cur = 1e-30L;
    long double sum = 0.0L, saved = (nu == start) ? cur : 0.0L;
    if (start % 2 == 0 && start >= 2) sum += 2.0L * cur;
    for (int k = start; k >= 1; --k) {
        long double down = (2.0L * k) / x * cur - up;
        up = cur;
        cur = down;
        int idx = k - 1;
        if (idx == nu) saved = cur;
        if (idx % 2 == 0 && idx >= 2) sum += 2.0L * cur;
        if (std::abs(cur) > 1e280L) {
            cur *= 1e-280L;
            up *= 1e-280L;
            saved *= 1e-280L;
            sum *= 1e-280L;
        }
    }
    sum += cur; // J_0 contribution
    return (double)(saved / sum);
}

} // namespace

double bessel_j(double nu, double x) {
    if (!(x >= 0.0) || x > 1e6) throw ConfigError("bessel_j: x out of range [0, 1e6]");
    if (!(nu >= 0.0) || nu > 30.0) throw ConfigError("bessel_j: order out of range [0, 30]");
    double twice = 2.0 * nu;
    if (std::abs(twice - std::llround(twice)) > 1e-12)
        throw ConfigError("bessel_j: order must be an integer or half-integer");
    if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
    bool half = (std::llround(twice) % 2) != 0;
    if (half) {
        int n = (int)std::llround(nu - 0.5);
        return std::sqrt(2.0 * x / kPi) * spherical_jn(n, x);
    }
    int n = (int)std::llround(nu);
    if (x <= 0.5) return bessel_series_small(n, x);
    if (x > 20.0) {
        double out;
        if (bessel_hankel(nu, x, out)) return out;
    }
    return bessel_miller_integer(n, x);
}

// ----------------------------------------------------- indicator symbols --

namespace {

double sinc(double y) {
    if (std::abs(y) < 1e-4) {
        double y2 = y * y;
        return 1.0 - y2 / 6.0 * (1.0 - y2 / 20.0);
    }
    return std::sin(y) / y;
}

// J_{m/2}(u) / u^{m/2} with its finite limit at u = 0
double ball_profile(int m, double u) {
    double nu = 0.5 * m;
    if (u < 0.5) {
        double term = 1.0 / (std::pow(2.0, nu) * std::tgamma(nu + 1.0));
        double sum = term;
        double u2 = u * u;
        for (int k = 1; k <= 10; ++k) {
            term *= -u2 / (4.0 * k * (nu + k));
            sum += term;
        }
        return sum;
    }
    return bessel_j(nu, u) / std::pow(u, nu);
}

std::complex<double> phase(double dot) {
    // e(dot) = exp(-2 pi i dot)
    return std::polar(1.0, -2.0 * kPi * dot);
}

} // namespace

std::complex<double> fourier_indicator(const Region& region, const Vec& xi) {
    if (xi.size() != region.dim) throw ConfigError("fourier_indicator: dimension mismatch");
    switch (region.kind) {
    case RegionKind::Ball: {
        if (region.dim == 1) {
            // interval of halfwidth r; closed form valid at any argument
            double val = 2.0 * region.radius * sinc(2.0 * kPi * region.radius * xi[0]);
            return val * phase(region.center.dot(xi));
        }
        double u = 2.0 * kPi * region.radius * xi.norm();
        double val = std::pow(region.radius, region.dim) *
                     std::pow(2.0 * kPi, 0.5 * region.dim) * ball_profile(region.dim, u);
        return val * phase(region.center.dot(xi));
    }
    case RegionKind::Box: {
        double val = 1.0;
        for (int i = 0; i < region.dim; ++i)
            val *= 2.0 * region.halfwidths[i] * sinc(2.0 * kPi * region.halfwidths[i] * xi[i]);
        return val * phase(region.center.dot(xi));
    }
    case RegionKind::IntervalUnion: {
        std::complex<double> sum = 0.0;
        for (const auto& p : region.intervals) {
            double len = p.length();
            double c = 0.5 * (p.lo + p.hi);
            sum += len * sinc(kPi * len * xi[0]) * phase(c * xi[0]);
        }
        return sum;
    }
    }
    return 0.0;
}

DecayClass decay_class(const Region& region) {
    if (region.kind == RegionKind::Ball)
        return {0.5 * (region.dim + 1), "strictly-convex"};
    return {1.0, "finite-perimeter"};
}

IndicatorEnvelope indicator_envelope(const Region& region) {
    IndicatorEnvelope env;
    env.order = decay_class(region).order;
    switch (region.kind) {
    case RegionKind::Box: {
        double best = 0.0;
        double root = std::sqrt((double)region.dim);
        for (int j = 0; j < region.dim; ++j) {
            double a = 2.0 * region.halfwidths[j] + root / kPi;
            for (int i = 0; i < region.dim; ++i)
                if (i != j) a *= 2.0 * region.halfwidths[i];
            best = std::max(best, a);
        }
        env.amplitude = best;
        return env;
    }
    case RegionKind::IntervalUnion: {
        double a = 0.0;
        for (const auto& p : region.intervals) a += p.length() + 1.0 / kPi;
        env.amplitude = a;
        return env;
    }
    case RegionKind::Ball: {
        // |J_nu(u)| <= min(u^nu / (2^nu Gamma(nu+1)), beta u^{-1/2}); beta = 1
        // is valid for the orders arising from dimensions <= 6
        if (region.dim > 6) throw ConfigError("indicator_envelope: ball dimension > 6");
        double m = region.dim;
        double nu = 0.5 * m;
        double r = region.radius;
        double scale = std::pow(r, m) * std::pow(2.0 * kPi, 0.5 * m);
        double g0 = 1.0 / (std::pow(2.0, nu) * std::tgamma(nu + 1.0));
        // crossover of the two bounds in u, then convert to |xi|
        double u0 = std::pow(std::pow(2.0, nu) * std::tgamma(nu + 1.0), 1.0 / (nu + 0.5));
        double xi0 = u0 / (2.0 * kPi * r);
        double flat = scale * g0 * std::pow(1.0 + xi0, nu + 0.5);
        double osc = scale * std::pow(2.0 * kPi * r, -nu - 0.5) *
                     std::pow(1.0 + 1.0 / xi0, nu + 0.5);
        env.amplitude = std::max(flat, osc);
        return env;
    }
    }
    return env;
}

// -------------------------------------------------------------- mollifier --

namespace {

double bump_raw(double x) {
    double s = 1.0 - x * x;
    return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
}

constexpr int kCdfCells = 8192;

struct BumpTables {
    std::array<double, kCdfCells + 1> cdf{};
    double mass = 0.0; // integral of the raw bump over [-1,1]

    BumpTables() {
        // 4-node Gauss-Legendre per cell, accumulated
        static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                                     0.3399810435848563, 0.8611363115940526};
        static const double gw[4] = {0.34785484513745385, 0.6521451548625461,
                                     0.6521451548625461, 0.34785484513745385};
        double h = 2.0 / kCdfCells;
        cdf[0] = 0.0;
        for (int i = 0; i < kCdfCells; ++i) {
            double a = -1.0 + i * h, b = a + h;
            double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += gw[k] * bump_raw(mid + half * gx[k]);
            cdf[i + 1] = cdf[i] + s * half;
        }
        mass = cdf[kCdfCells];
    }
};

const BumpTables& bump_tables() {
    static const BumpTables tables;
    return tables;
}

constexpr double kTransformStep = 0.005;
constexpr int kTransformPoints = (int)(kMollifierCacheLimit / kTransformStep) + 1;

struct TransformTable {
    std::vector<double> values;
    double envelope = 1.0;

    TransformTable() {
        values.resize(kTransformPoints);
        static const double gx[12] = {
            -0.9815606342467192, -0.9041172563704749, -0.7699026741943047,
            -0.5873179542866175, -0.3678314989981802, -0.1252334085114689,
            0.1252334085114689,  0.3678314989981802,  0.5873179542866175,
            0.7699026741943047,  0.9041172563704749,  0.9815606342467192};
        static const double gw[12] = {
            0.0471753363865118, 0.1069393259953184, 0.1600783285433462,
            0.2031674267230659, 0.2334925365383548, 0.2491470458134028,
            0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
            0.1600783285433462, 0.1069393259953184, 0.0471753363865118};
        double mass = bump_tables().mass;
        std::vector<double> edges;
        for (int i = 0; i < kTransformPoints; ++i) {
            double u = i * kTransformStep;
            // mesh: uniform panels against the oscillation, geometrically
            // refined toward the support edge where the bump is non-analytic
            int osc = std::max(4, (int)std::ceil(1.3 * u));
            edges.clear();
            for (int p = 0; p <= osc; ++p) edges.push_back((double)p / osc);
            for (int j = 1; j <= 44; ++j) edges.push_back(1.0 - std::exp2(-(double)j));
            std::sort(edges.begin(), edges.end());
            double acc = 0.0;
            for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
                double a = edges[p], b = edges[p + 1];
                if (!(b > a)) continue;
                double mid = 0.5 * (a + b), half = 0.5 * (b - a);
                double s = 0.0;
                for (int k = 0; k < 12; ++k) {
                    double x = mid + half * gx[k];
                    s += gw[k] * std::cos(2.0 * kPi * x * u) * bump_raw(x);
                }
                acc += s * half;
            }
            values[i] = 2.0 * acc / mass;
        }
        double env = 0.0;
        for (int i = 0; i < kTransformPoints; ++i) {
            double u = i * kTransformStep;
            env = std::max(env, std::abs(values[i]) *
                                    std::pow(1.0 + u, kMollifierDecayOrder));
        }
        envelope = 1.05 * env;
    }
};

const TransformTable& transform_table() {
    static const TransformTable table;
    return table;
}

} // namespace

double bump_cdf(double x) {
    const auto& t = bump_tables();
    if (x <= -1.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double pos = (x + 1.0) / 2.0 * kCdfCells;
    int i = std::min((int)pos, kCdfCells - 1);
    double h = 2.0 / kCdfCells;
    double x0 = -1.0 + i * h;
    double s = (x - x0) / h;
    // cubic Hermite, derivatives are the bump itself
    double p0 = t.cdf[i], p1 = t.cdf[i + 1];
    double m0 = bump_raw(x0) * h, m1 = bump_raw(x0 + h) * h;
    double s2 = s * s, s3 = s2 * s;
    double v = (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 +
               (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1;
    return v / t.mass;
}

double mollifier_fourier_1d(double u) {
    u = std::abs(u);
    if (u >= kMollifierCacheLimit) return 0.0;
    const auto& t = transform_table();
    double pos = u / kTransformStep;
    int i = (int)pos;
    double s = pos - i;
    // 4-point Catmull-Rom through neighbouring samples
    int i0 = std::max(i - 1, 0), i1 = i, i2 = std::min(i + 1, kTransformPoints - 1),
        i3 = std::min(i + 2, kTransformPoints - 1);
    double p0 = t.values[i0], p1 = t.values[i1], p2 = t.values[i2], p3 = t.values[i3];
    double a = 0.5 * (-p0 + 3 * p1 - 3 * p2 + p3);
    double b = 0.5 * (2 * p0 - 5 * p1 + 4 * p2 - p3);
    double c = 0.5 * (-p0 + p2);
    return ((a * s + b) * s + c) * s + p1;
}

double mollifier_envelope_constant() { return transform_table().envelope; }

double mollifier_fourier(const SplitSpace& split, const MollifierParams& params,
                         const Vec& xi) {
    if (xi.size() != split.dim()) throw ConfigError("mollifier_fourier: dimension mismatch");
    double v = 1.0;
    for (int i = 0; i < split.d_down; ++i) v *= mollifier_fourier_1d(params.a_down * xi[i]);
    for (int i = 0; i < split.d_left; ++i)
        v *= mollifier_fourier_1d(params.a_left * xi[split.d_down + i]);
    return v;
}

// ------------------------------------------------------- +/- approximants --

Region approx_region(const Region& region, double a, int sign) {
    if (sign >= 0) {
        double amount = region.kind == RegionKind::Ball ? a * std::sqrt((double)region.dim) : a;
        return region.inflate(amount);
    }
    auto inner = approx_region_inner(region, a);
    if (!inner) throw NumericalError("approx_region: empty interior approximation");
    return *inner;
}

std::optional<Region> approx_region_inner(const Region& region, double a) {
    double amount = region.kind == RegionKind::Ball ? a * std::sqrt((double)region.dim) : a;
    return region.deflate(amount);
}

// ------------------------------------------------------ convolution factor --

namespace {

// (chi_A * bump_a)(w) for the per-coordinate product bump scaled by a
double conv_factor(const Region& A, double a, const Vec& w) {
    switch (A.kind) {
    case RegionKind::Box: {
        double v = 1.0;
        for (int i = 0; i < A.dim; ++i) {
            double lo = A.center[i] - A.halfwidths[i];
            double hi = A.center[i] + A.halfwidths[i];
            double f = bump_cdf((w[i] - lo) / a) - bump_cdf((w[i] - hi) / a);
            if (f <= 0.0) return 0.0;
            v *= f;
        }
        return v;
    }
    case RegionKind::IntervalUnion: {
        double v = 0.0;
        for (const auto& p : A.intervals) {
            double f = bump_cdf((w[0] - p.lo) / a) - bump_cdf((w[0] - p.hi) / a);
            if (f > 0.0) v += f;
        }
        return v;
    }
    case RegionKind::Ball: {
        if (A.dim == 1) {
            double lo = A.center[0] - A.radius;
            double hi = A.center[0] + A.radius;
            double f = bump_cdf((w[0] - lo) / a) - bump_cdf((w[0] - hi) / a);
            return std::max(f, 0.0);
        }
        if (A.dim != 2) throw NumericalError("smoothed counts support factors of dimension <= 2");
        // integrate over u1: bump(u1) * (cdf span of admissible u2)
        double cx = w[0] - A.center[0];
        double cy = w[1] - A.center[1];
        double R = A.radius;
        // admissible u1 needs |cx - a u1| < R
        double lo = std::max(-1.0, (cx - R) / a);
        double hi = std::min(1.0, (cx + R) / a);
        if (!(hi > lo)) return 0.0;
        // critical u1 where the section endpoints cross the support edges
        std::vector<double> knots{lo, hi};
        for (double v : {cy - a, cy + a}) {
            double disc = R * R - v * v;
            if (disc > 0.0) {
                double root = std::sqrt(disc);
                for (double q : {cx - root, cx + root}) {
                    double u = q / a;
                    if (u > lo && u < hi) knots.push_back(u);
                }
            }
        }
        std::sort(knots.begin(), knots.end());
        double mass = bump_tables().mass;
        auto section = [&](double u1) {
            double q = cx - a * u1;
            double disc = R * R - q * q;
            if (disc <= 0.0) return 0.0;
            double s = std::sqrt(disc);
            double f = bump_cdf((cy + s) / a) - bump_cdf((cy - s) / a);
            return f > 0.0 ? bump_raw(u1) * f : 0.0;
        };
        // tanh-sinh per knot interval: handles the square-root section kinks
        // at the ends and the doubly-exponential bump edges alike
        constexpr double kH = 0.08;
        constexpr int kK = 47;
        double acc = 0.0;
        for (std::size_t p = 0; p + 1 < knots.size(); ++p) {
            double a0 = knots[p], b0 = knots[p + 1];
            if (!(b0 > a0)) continue;
            double c0 = 0.5 * (a0 + b0), r0 = 0.5 * (b0 - a0);
            double piece = 0.0;
            for (int k = -kK; k <= kK; ++k) {
                double tt = k * kH;
                double sh = std::sinh(tt);
                double x = std::tanh(0.5 * kPi * sh);
                if (1.0 - std::abs(x) < 1e-17) continue;
                double w = (0.5 * kPi * std::cosh(tt)) /
                           std::pow(std::cosh(0.5 * kPi * sh), 2);
                piece += w * section(c0 + r0 * x);
            }
            acc += piece * r0 * kH;
        }
        return acc / mass;
    }
    }
    return 0.0;
}

} // namespace

SmoothedCount smoothed_count(const ModelSetSpec& spec, double t,
                             const MollifierParams& params, int sign) {
    spec.validate();
    if (!(t > 0)) throw ConfigError("smoothed_count: t must be positive");
    if (!(params.a_down > 0) || !(params.a_left > 0))
        throw ConfigError("smoothed_count: smoothing radii must be positive");
    if (!(params.a_down < t / 4)) throw ConfigError("smoothed_count: needs a_down < t/4");

    Region dilated = spec.search.dilate(t);
    SmoothedCount out;
    Region a_down_region = dilated, a_left_region = spec.window;
    if (sign >= 0) {
        a_down_region = approx_region(dilated, params.a_down, +1);
        a_left_region = approx_region(spec.window, params.a_left, +1);
    } else {
        auto rd = approx_region_inner(dilated, params.a_down);
        auto rl = approx_region_inner(spec.window, params.a_left);
        if (!rd || !rl) {
            out.empty_interior = true;
            return out;
        }
        a_down_region = *rd;
        a_left_region = *rl;
    }

    // enumerate a superset: bounding boxes inflated by the kernel support
    auto [cd, hd] = a_down_region.bounding_box();
    auto [cl, hl] = a_left_region.bounding_box();
    double pad_d = params.a_down * (1.0 + 1e-9);
    double pad_l = params.a_left * (1.0 + 1e-9);
    ProductRegion cover{Region::box(cd, Vec(hd.array() + pad_d)),
                        Region::box(cl, Vec(hl.array() + pad_l))};
    auto pts = enumerate_in(spec.lattice, cover, -spec.shift);

    double sum = 0.0;
    for (const auto& gp : pts) {
        Vec w = gp.point - spec.shift;
        double fd = conv_factor(a_down_region, params.a_down, w.head(spec.split.d_down));
        if (fd == 0.0) continue;
        double fl = conv_factor(a_left_region, params.a_left, w.tail(spec.split.d_left));
        sum += fd * fl;
    }
    out.value = sum;
    return out;
}

// ------------------------------------------------------------ tail bounds --

double EnvelopeFactor::value(double u) const {
    return std::min(1.0, amp * std::pow(1.0 + b * u, -p));
}

double AxisEnvelope::value(double u) const {
    double v = amplitude;
    for (const auto& f : factors) v *= f.value(u);
    return v;
}

namespace {

// integral_X^inf (1 + b r)^{-p} r^k dr for k in {0,1,2}, p > k+1
double power_tail(double b, double p, int k, double X) {
    double y = 1.0 + b * X;
    double inv = 1.0 / b;
    switch (k) {
    case 0:
        return std::pow(y, 1.0 - p) / (b * (p - 1.0));
    case 1:
        return inv * inv * (std::pow(y, 2.0 - p) / (p - 2.0) - std::pow(y, 1.0 - p) / (p - 1.0));
    case 2:
        return inv * inv * inv *
               (std::pow(y, 3.0 - p) / (p - 3.0) - 2.0 * std::pow(y, 2.0 - p) / (p - 2.0) +
                std::pow(y, 1.0 - p) / (p - 1.0));
    default:
        throw NumericalError("power_tail: moment order not supported");
    }
}

// integral_X^inf min(1, amp (1 + b r)^{-p}) r^k dr
double capped_tail(const EnvelopeFactor& f, int k, double X) {
    if (f.amp <= 1.0) return f.amp * power_tail(f.b, f.p, k, X);
    double ustar = (std::pow(f.amp, 1.0 / f.p) - 1.0) / f.b;
    if (X >= ustar) return f.amp * power_tail(f.b, f.p, k, X);
    double flat = (std::pow(ustar, k + 1) - std::pow(X, k + 1)) / (k + 1);
    return flat + f.amp * power_tail(f.b, f.p, k, ustar);
}

double sphere_surface(int m) {
    switch (m) {
    case 1: return 2.0;
    case 2: return 2.0 * kPi;
    case 3: return 4.0 * kPi;
    default: throw NumericalError("tail bounds support factors of dimension <= 3");
    }
}

// single-factor closed form: integrate factor j, bound the others at X
double single_factor_moment(const AxisEnvelope& env, int k, double X) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < env.factors.size(); ++j) {
        if (!(env.factors[j].p > k + 1)) continue;
        double amp = env.amplitude;
        for (std::size_t i = 0; i < env.factors.size(); ++i)
            if (i != j) amp *= env.factors[i].value(X);
        best = std::min(best, amp * capped_tail(env.factors[j], k, X));
    }
    return best;
}

// integral_{X}^inf env(rho) rho^k d rho: a geometric step majorant over the
// near range (the envelope is nonincreasing) switching to the closed form
// once a single factor carries the tail
double envelope_moment(const AxisEnvelope& env, int k, double X) {
    double best = single_factor_moment(env, k, X);
    double total = 0.0;
    double s = X;
    double width = std::max(0.125, 0.03125 * std::max(X, 1.0));
    for (int iter = 0; iter < 96; ++iter) {
        double closed = single_factor_moment(env, k, s);
        if (std::isfinite(closed)) best = std::min(best, total + closed);
        double next = s + width;
        total += env.value(s) * width * std::pow(next, k);
        s = next;
        width *= 1.25;
    }
    return best;
}

} // namespace

double radial_tail_integral(int m, double X, const AxisEnvelope& env, double slack) {
    double surf = sphere_surface(m);
    double Xp = std::max(X - slack, 0.0);
    double total = 0.0;
    // flat piece between X and slack where the shifted argument is clamped at 0
    if (X < slack)
        total += env.value(0.0) * surf * (std::pow(slack, m) - std::pow(std::max(X, 0.0), m)) / m;
    // integral of env(rho) (rho + slack)^{m-1} over rho > X'
    static const double binom[3][3] = {{1, 0, 0}, {1, 1, 0}, {1, 2, 1}};
    for (int j = 0; j < m; ++j) {
        double mom = envelope_moment(env, j, Xp);
        if (!std::isfinite(mom)) return std::numeric_limits<double>::infinity();
        total += surf * binom[m - 1][m - 1 - j] * std::pow(slack, m - 1 - j) * mom;
    }
    return total;
}

double dual_tail_bound(const Lattice& dual, const SplitSpace& split, double T,
                       const AxisEnvelope& down, const AxisEnvelope& left) {
    double D = dual.cell_radius();
    double X = T / std::sqrt(2.0);
    double density = 1.0 / dual.covolume();
    double full_down = radial_full_integral(split.d_down, down, D);
    double full_left = radial_full_integral(split.d_left, left, D);
    double tail_down = radial_tail_integral(split.d_down, X, down, D);
    double tail_left = radial_tail_integral(split.d_left, X, left, D);
    if (!std::isfinite(full_down) || !std::isfinite(full_left))
        throw NumericalError("dual_tail_bound: envelope not integrable for this region class");
    return 10.0 * density * (full_down * tail_left + tail_down * full_left);
}

// ------------------------------------------------------------- dual sums --

PoissonBreakdown poisson_dual_sum(const ModelSetSpec& spec, double t,
                                  const MollifierParams& params, int sign, double tolerance,
                                  int threads, std::int64_t max_dual_points) {
    spec.validate();
    if (!(tolerance > 0)) throw ConfigError("poisson_dual_sum: tolerance must be positive");
    if (!(params.a_down < t / 4)) throw ConfigError("poisson_dual_sum: needs a_down < t/4");

    Region dilated = spec.search.dilate(t);
    PoissonBreakdown out;
    Region region_down = dilated, region_left = spec.window;
    if (sign >= 0) {
        region_down = approx_region(dilated, params.a_down, +1);
        region_left = approx_region(spec.window, params.a_left, +1);
    } else {
        auto rd = approx_region_inner(dilated, params.a_down);
        auto rl = approx_region_inner(spec.window, params.a_left);
        if (!rd || !rl) {
            out.empty_interior = true;
            return out;
        }
        region_down = *rd;
        region_left = *rl;
    }

    Lattice dual = spec.lattice.dual();
    double covol = spec.lattice.covolume();
    double cenv = mollifier_envelope_constant();

    // per axis: |F chi| <= vol * min(1, (Env/vol)(1+u)^{-L}), and the product
    // of kernel transforms is bounded through its largest coordinate
    IndicatorEnvelope ed = indicator_envelope(region_down);
    IndicatorEnvelope el = indicator_envelope(region_left);
    double vol_down = region_down.volume();
    double vol_left = region_left.volume();
    AxisEnvelope down{vol_down / covol,
                      {{ed.amplitude / vol_down, 1.0, ed.order},
                       {cenv, params.a_down / std::sqrt((double)spec.split.d_down),
                        kMollifierDecayOrder}}};
    AxisEnvelope left{vol_left,
                      {{el.amplitude / vol_left, 1.0, el.order},
                       {cenv, params.a_left / std::sqrt((double)spec.split.d_left),
                        kMollifierDecayOrder}}};

    if (spec.lattice.splits_as_product(spec.split)) {
        // the dual sum factors across the split; per-factor truncation with
        // much smaller certified radii
        Lattice dual_down = dual.down_factor(spec.split);
        Lattice dual_left = dual.left_factor(spec.split);
        AxisEnvelope envd = down;
        envd.amplitude = vol_down; // covol handled once at the end
        const Vec s_down = spec.shift.head(spec.split.d_down);
        const Vec s_left = spec.shift.tail(spec.split.d_left);

        auto factor_bound = [&](const Lattice& fac, int m, const AxisEnvelope& env,
                                double vol0) {
            return vol0 + radial_full_integral(m, env, fac.cell_radius()) / fac.covolume();
        };
        auto factor_tail = [&](const Lattice& fac, int m, const AxisEnvelope& env, double R) {
            return 10.0 * radial_tail_integral(m, R, env, fac.cell_radius()) /
                   fac.covolume();
        };
        double bound_down = factor_bound(dual_down, spec.split.d_down, envd, vol_down);
        double bound_left = factor_bound(dual_left, spec.split.d_left, left, vol_left);

        auto pick_radius = [&](const Lattice& fac, int m, const AxisEnvelope& env,
                               double target) {
            double R = 8.0;
            while (factor_tail(fac, m, env, R) > target) {
                R *= 1.3;
                if (ball_point_estimate(fac, R) > (double)max_dual_points)
                    throw BudgetError(
                        "poisson_dual_sum: tolerance unreachable within the dual point budget");
            }
            return R;
        };
        double target_down = 0.25 * tolerance * covol / std::max(bound_left, 1e-300);
        double target_left = 0.25 * tolerance * covol / std::max(bound_down, 1e-300);
        double Rd = pick_radius(dual_down, spec.split.d_down, envd, target_down);
        double Rl = pick_radius(dual_left, spec.split.d_left, left, target_left);
        double tail_d = factor_tail(dual_down, spec.split.d_down, envd, Rd);
        double tail_l = factor_tail(dual_left, spec.split.d_left, left, Rl);
        // mass discarded beyond the transform cache, per factor
        tail_d += factor_tail(dual_down, spec.split.d_down, envd,
                              std::max(kMollifierCacheLimit / params.a_down -
                                           dual_down.cell_radius(), 0.0));
        tail_l += factor_tail(dual_left, spec.split.d_left, left,
                              std::max(kMollifierCacheLimit / params.a_left -
                                           dual_left.cell_radius(), 0.0));

        auto factor_sum_c = [&](const Lattice& fac, double R, const Region& reg, double a,
                                const Vec& sh, std::int64_t& pts) {
            auto term = [&](const Vec& eta, bool imag_part) {
                double mol = 1.0;
                for (int i = 0; i < eta.size(); ++i) mol *= mollifier_fourier_1d(a * eta[i]);
                if (mol == 0.0) return 0.0;
                std::complex<double> v = fourier_indicator(reg, eta) * phase(sh.dot(eta)) * mol;
                return imag_part ? v.imag() : v.real();
            };
            std::int64_t n1 = 0, n2 = 0;
            double re = ball_sum(fac, R, threads,
                                 [&](const Vec& p) { return term(p, false); }, &n1);
            double im = ball_sum(fac, R, threads,
                                 [&](const Vec& p) { return term(p, true); }, &n2);
            pts = n1;
            return std::complex<double>(re + reg.volume(), im); // include the zero term
        };
        std::int64_t nd = 0, nl = 0;
        std::complex<double> Sd = factor_sum_c(dual_down, Rd, region_down, params.a_down,
                                               s_down, nd);
        std::complex<double> Sl = factor_sum_c(dual_left, Rl, region_left, params.a_left,
                                               s_left, nl);
        out.volume_term = vol_down * vol_left / covol;
        out.remainder_term = (Sd * Sl).real() / covol - out.volume_term;
        out.truncation_radius = std::max(Rd, Rl);
        out.tail_bound = (bound_left * tail_d + bound_down * tail_l + tail_d * tail_l) /
                         covol;
        out.dual_points = nd + nl;
        return out;
    }

    double T = 8.0;
    while (dual_tail_bound(dual, spec.split, T, down, left) > tolerance) {
        T *= 1.3;
        if (ball_point_estimate(dual, T) > (double)max_dual_points)
            throw BudgetError("poisson_dual_sum: tolerance unreachable within the dual point budget");
    }
    double tail = dual_tail_bound(dual, spec.split, T, down, left);
    // mass discarded past the transform cache: per-axis coordinate cutoffs
    {
        double D = dual.cell_radius();
        double density = 1.0 / dual.covolume();
        double cut_down = std::max(kMollifierCacheLimit / params.a_down - D, 0.0);
        double cut_left = std::max(kMollifierCacheLimit / params.a_left - D, 0.0);
        tail += 10.0 * density *
                (radial_tail_integral(spec.split.d_down, cut_down, down, D) *
                     radial_full_integral(spec.split.d_left, left, D) +
                 radial_full_integral(spec.split.d_down, down, D) *
                     radial_tail_integral(spec.split.d_left, cut_left, left, D));
    }

    auto term = [&](const Vec& xi) {
        double mol = mollifier_fourier(spec.split, params, xi);
        if (mol == 0.0) return 0.0;
        std::complex<double> fd = fourier_indicator(region_down, xi.head(spec.split.d_down));
        std::complex<double> fl = fourier_indicator(region_left, xi.tail(spec.split.d_left));
        std::complex<double> ph = phase(spec.shift.dot(xi));
        return (ph * fd * fl).real() * mol / covol;
    };
    std::int64_t n = 0;
    out.remainder_term = ball_sum(dual, T, threads, term, &n);
    out.volume_term = region_down.volume() * region_left.volume() / covol;
    out.truncation_radius = T;
    out.tail_bound = tail;
    out.dual_points = n;
    return out;
}

MollifierParams choose_params(double t, double s, const PsiFunction& psi, double delta,
                              const SplitSpace& split, double L_down) {
    if (!(delta > 0 && delta < 1)) throw ConfigError("choose_params: delta must be in (0,1)");
    if (!(s > 0 && s <= 1)) throw ConfigError("choose_params: s must be in (0,1]");
    if (!(psi(t) > 1)) throw ConfigError("choose_params: psi(t) <= 1, t below threshold");
    MollifierParams p;
    p.delta = delta;
    if (psi.growth_class() == GrowthClass::Slow) {
        p.sigma = 1.0;
        p.a_down = std::sqrt(t);
        p.a_left = std::pow(psi(t), -1.0 + delta);
    } else {
        double mu = psi.exponent;
        p.sigma = split.d_down / (s * mu * (1.0 - delta) * (split.d_down - L_down + 1.0) +
                                  L_down + (1.0 - delta) * split.d_left * mu);
        p.a_down = std::pow(t, 1.0 + p.sigma * mu * s * (delta - 1.0));
        p.a_left = std::pow(psi(std::pow(t, p.sigma)), -1.0 + delta);
    }
    return p;
}

} // namespace capset
