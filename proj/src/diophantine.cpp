#include "capset/diophantine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace capset {

RepellenceProfile repellence_profile(const Lattice& lattice, const SplitSpace& split,
                                     const std::vector<double>& epsilons,
                                     double search_radius) {
    if (split.dim() != lattice.dim())
        throw ConfigError("repellence_profile: split does not match lattice");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0))
            throw ConfigError("repellence_profile: epsilons must be positive");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
            throw ConfigError("repellence_profile: epsilons must be decreasing");
    }
    auto pts = enumerate_in_ball(lattice, search_radius);
    RepellenceProfile prof;
    prof.search_radius = search_radius;
    for (double eps : epsilons) {
        RepellenceRow row;
        row.epsilon = eps;
        row.min_left = std::numeric_limits<double>::infinity();
        for (const auto& p : pts) {
            double down = split.project_down(p.point).norm();
            if (down > eps) continue;
            double left = split.project_left(p.point).norm();
            if (left < row.min_left) {
                row.min_left = left;
                row.witness = p;
            }
        }
        prof.rows.push_back(std::move(row));
    }
    return prof;
}

RepellenceCheck check_repellent(const RepellenceProfile& profile, const PsiFunction& psi) {
    if (profile.rows.empty()) throw ConfigError("check_repellent: empty profile");
    RepellenceCheck out;
    out.holds = true;
    out.worst_margin = std::numeric_limits<double>::infinity();
    for (const auto& row : profile.rows) {
        double bound = psi(1.0 / row.epsilon);
        double margin = row.min_left / bound;
        out.worst_margin = std::min(out.worst_margin, margin);
        if (!(row.min_left > bound)) out.holds = false;
    }
    return out;
}

IrrationalityScan irrationality_scan(const Lattice& lattice, const SplitSpace& split,
                                     double search_radius, double tol) {
    if (!(tol > 0)) throw ConfigError("irrationality_scan: tol must be positive");
    IrrationalityScan scan;
    for (const auto& p : enumerate_in_ball(lattice, search_radius))
        if (split.project_down(p.point).norm() < tol) scan.gamma_hits.push_back(p);
    for (const auto& p : enumerate_in_ball(lattice.dual(), search_radius))
        if (split.project_down(p.point).norm() < tol) scan.dual_hits.push_back(p);
    return scan;
}

// ---------------------------------------------------------------- liouville

BigInt LiouvilleData::q(int n) const {
    if (n < 1 || n > depth()) throw ConfigError("liouville: level out of range");
    return BigInt(1) << static_cast<unsigned>(exponents[n - 1]);
}

BigInt LiouvilleData::m(int n) const {
    if (n < 1 || n > depth()) throw ConfigError("liouville: level out of range");
    BigInt v = 0;
    for (int j = 0; j < n; ++j)
        v += BigInt(1) << static_cast<unsigned>(exponents[n - 1] - exponents[j]);
    return v;
}

BigInt LiouvilleData::left_component(int n) const { return q(n) - m(n); }

double LiouvilleData::fractional_part(int n) const {
    if (n < 1 || n > depth()) throw ConfigError("liouville: level out of range");
    double v = 0.0;
    for (int j = n; j < depth(); ++j) {
        double e = static_cast<double>(exponents[n - 1] - exponents[j]);
        if (e < -1074.0) break;
        v += std::exp2(e);
    }
    return v;
}

double LiouvilleData::verification_margin(int n) const {
    if (n < 1 || n > depth()) throw ConfigError("liouville: level out of range");
    // Last level: a truncates to a dyadic rational, ||q_n a|| = 0 and
    // psi(infinity) = infinity, the condition is vacuous.
    if (n == depth()) return std::numeric_limits<double>::infinity();
    // ||q_n a|| <= 2^{c_n - c_{n+1} + 1} exactly, so it suffices that
    // psi(2^E) >= 2^{c_n} with E = c_{n+1} - c_n - 1. Compare in the log2
    // domain; the exponent arithmetic is exact, the transcendental side is
    // evaluated in long double with an exact lower bound for log(1 + 2^E).
    long double E = static_cast<long double>(exponents[n] - exponents[n - 1] - 1);
    long double target = static_cast<long double>(exponents[n - 1]); // log2 q_n
    long double lhs;
    if (psi.kind == PsiKind::PowerLaw) {
        // log2 psi(2^E) = log2 c + mu E
        lhs = std::log2l((long double)psi.c) + (long double)psi.exponent * E;
    } else {
        // log(1 + 2^E) >= E log 2 (+ exact tail), beta log2 of that
        long double ln2 = 0.6931471805599453094172321214581766L;
        long double inner = E * ln2;
        if (E < 60.0L) inner += std::log1pl(std::exp2l(-E));
        lhs = std::log2l((long double)psi.c) +
              (long double)psi.exponent * std::log2l(inner);
    }
    return static_cast<double>(lhs - target);
}

void LiouvilleData::verify() const {
    if (depth() < 1) throw ConfigError("liouville: empty data");
    for (int j = 1; j < depth(); ++j)
        if (exponents[j] <= exponents[j - 1] + 1)
            throw NumericalError("liouville: exponents must increase by at least 2");
    for (int n = 1; n <= depth(); ++n)
        if (!(verification_margin(n) >= 0.0))
            throw NumericalError("liouville: level " + std::to_string(n) +
                                 " fails the gauge inequality");
}

LiouvilleData liouville_number(const PsiFunction& psi, int depth, std::int64_t bit_budget) {
    if (depth < 1) throw ConfigError("liouville_number: depth must be >= 1");
    if (!(psi(1.0) < 2.0))
        throw ConfigError("liouville_number: gauge too large at 1, pick smaller c");
    LiouvilleData data;
    data.psi = psi;
    std::int64_t c = 1;
    for (int k = 0; k < depth; ++k) {
        data.exponents.push_back(c);
        if (k + 1 == depth) break;
        // next exponent: c + ceil(log2 psi^{-1}(2^c)) + 1, in the log domain
        long double log2_inv;
        if (psi.kind == PsiKind::PowerLaw) {
            // psi^{-1}(y) = (y/c)^{1/mu}: log2 = (c_bits - log2 cpsi)/mu
            log2_inv = ((long double)c - std::log2l((long double)psi.c)) /
                       (long double)psi.exponent;
        } else {
            // psi^{-1}(y) = e^{(y/c)^{1/beta}} - 1
            long double y_over_c_pow;
            long double log2y = (long double)c - std::log2l((long double)psi.c);
            // (2^{log2y})^{1/beta} = 2^{log2y/beta}
            y_over_c_pow = std::exp2l(log2y / (long double)psi.exponent);
            if (y_over_c_pow > 1.0e18L)
                throw BudgetError("liouville_number: exponent exceeds the bit budget");
            // log2(e^x - 1) <= x/log 2
            log2_inv = y_over_c_pow / 0.6931471805599453094172321214581766L;
        }
        std::int64_t step = static_cast<std::int64_t>(ceill(log2_inv));
        if (step < 1) step = 1;
        if (c > bit_budget - step - 1)
            throw BudgetError("liouville_number: exponent exceeds the bit budget");
        c = c + step + 1;
    }
    double a = 0.0;
    for (std::int64_t e : data.exponents)
        if (e <= 1074) a += std::exp2(-static_cast<double>(e));
    data.a_approx = a;
    data.verify();
    return data;
}

LiouvilleanLattice liouvillean_lattice(const PsiFunction& psi, int depth,
                                       const SplitSpace& split,
                                       const std::optional<Lattice>& tail_lattice,
                                       std::int64_t bit_budget) {
    const int d = split.dim();
    int tail_dim = d - 2;
    if (tail_dim < 0) throw ConfigError("liouvillean_lattice: needs dimension >= 2");
    if (tail_dim > 0) {
        if (!tail_lattice || tail_lattice->dim() != tail_dim)
            throw ConfigError("liouvillean_lattice: tail lattice must cover the remaining coordinates");
    }
    LiouvilleanLattice out{Lattice::integer_lattice(d), liouville_number(psi, depth, bit_budget), {}};

    // distinguished coordinates: first down axis and first left axis
    const int iD = 0;
    const int iL = split.d_down;
    Mat basis = Mat::Zero(d, d);
    basis(iD, 0) = out.data.a_approx;
    basis(iL, 0) = 1.0;
    basis(iD, 1) = 1.0;
    basis(iL, 1) = 1.0;
    // remaining columns from the tail lattice on the complement coordinates
    std::vector<int> rest;
    for (int i = 0; i < d; ++i)
        if (i != iD && i != iL) rest.push_back(i);
    for (int j = 0; j + 2 < d; ++j)
        for (int i = 0; i < tail_dim; ++i)
            basis(rest[static_cast<std::size_t>(i)], j + 2) = tail_lattice->basis()(i, j);
    out.lattice = Lattice(basis, "liouville");

    for (int n = 1; n <= out.data.depth(); ++n) {
        LiouvilleWitness w;
        w.level = n;
        w.coeff_a = out.data.q(n);
        w.coeff_unit = -out.data.m(n);
        Vec p = Vec::Zero(d);
        p[iD] = out.data.fractional_part(n);
        p[iL] = static_cast<double>(out.data.left_component(n));
        w.point = std::move(p);
        out.witnesses.push_back(std::move(w));
    }
    return out;
}

PredictedExponent predicted_exponent(int d_down, int d_left, double s,
                                     const PsiFunction& psi, SearchClass region_class) {
    if (d_down < 1 || d_left < 1) throw ConfigError("predicted_exponent: bad dimensions");
    if (!(s > 0 && s <= 1)) throw ConfigError("predicted_exponent: s must be in (0,1]");
    PredictedExponent out;
    if (psi.growth_class() == GrowthClass::Slow) {
        out.power_law = false;
        out.t_power = d_down;
        out.psi_power = -s;
        return out;
    }
    double mu = psi.exponent;
    out.power_law = true;
    if (region_class == SearchClass::Ball) {
        out.exponent =
            d_down - 2.0 * s * d_down / ((d_down + 1.0) * (s + 1.0 / mu) + 2.0 * d_left);
    } else {
        out.exponent = d_down - d_down * s / (d_down * s + d_left + 1.0 / mu);
    }
    return out;
}

std::int64_t golden_norm_form(std::int64_t n, std::int64_t m) {
    return std::llabs(n * n + n * m - m * m);
}

std::string bigint_to_string(const BigInt& v) { return v.str(); }

} // namespace capset
