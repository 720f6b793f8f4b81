#include "capset/diophantine.hpp"

#include <doctest.h>

#include <cmath>

using namespace capset;

TEST_CASE("golden norm form: exact lower bound and float agreement") {
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    const double phibar = 0.5 * (1.0 - std::sqrt(5.0));
    for (std::int64_t n = -1000; n <= 1000; n += 7) {
        for (std::int64_t m = -1000; m <= 1000; m += 11) {
            if (n == 0 && m == 0) continue;
            std::int64_t form = golden_norm_form(n, m);
            REQUIRE(form >= 1);
            double prod = std::abs((n + m * phi) * (n + m * phibar));
            REQUIRE(std::abs(prod - (double)form) <= 1e-6 * (double)form);
        }
    }
}

TEST_CASE("fibonacci pairs attain the norm-form minimum") {
    std::int64_t a = 1, b = 1; // F_1, F_2
    int witnesses = 0;
    for (int k = 0; k < 20; ++k) {
        std::int64_t next = a + b;
        // (n, m) = (F_{k+1}, -F_k)
        if (golden_norm_form(b, -a) == 1) ++witnesses;
        a = b;
        b = next;
    }
    CHECK(witnesses == 20);
}

TEST_CASE("repellence profile of the golden lattice") {
    Lattice g = Lattice::golden();
    SplitSpace split(1, 1);
    std::vector<double> eps{0.5, 0.25, 0.125, 0.0625};
    RepellenceProfile prof = repellence_profile(g, split, eps, 300.0);
    for (const auto& row : prof.rows) {
        REQUIRE(row.witness.has_value());
        // |down| |left| >= 1 exactly, so min_left >= 1/eps
        CHECK(row.min_left >= 1.0 / row.epsilon - 1e-9);
    }
    SUBCASE("gauge checks") {
        CHECK(check_repellent(prof, PsiFunction::power_law(0.5, 1.0)).holds);
        RepellenceCheck strong = check_repellent(prof, PsiFunction::power_law(0.5, 1.0));
        CHECK(strong.worst_margin >= 2.0 - 1e-9);
        CHECK_FALSE(check_repellent(prof, PsiFunction::power_law(2.0, 1.0)).holds);
    }
}

TEST_CASE("axis-aligned integer lattice fails every repellence gauge") {
    Lattice z2 = Lattice::integer_lattice(2);
    SplitSpace split(1, 1);
    RepellenceProfile prof = repellence_profile(z2, split, {0.5, 0.1, 0.01}, 50.0);
    for (const auto& row : prof.rows) {
        REQUIRE(row.witness.has_value());
        CHECK(row.min_left == doctest::Approx(1.0)); // the vector (0, 1)
        CHECK(row.witness->coords[0] == 0);
    }
    CHECK_FALSE(check_repellent(prof, PsiFunction::log_power(1.0, 1.0)).holds);
    CHECK_FALSE(check_repellent(prof, PsiFunction::power_law(1.0, 1.0)).holds);
}

TEST_CASE("irrationality scan") {
    SplitSpace split(1, 1);
    SUBCASE("integer lattice: hits in both lists") {
        IrrationalityScan scan = irrationality_scan(Lattice::integer_lattice(2), split, 10.0, 1e-6);
        CHECK(!scan.gamma_hits.empty());
        CHECK(!scan.dual_hits.empty());
    }
    SUBCASE("golden: clean at radius 1000") {
        IrrationalityScan scan = irrationality_scan(Lattice::golden(), split, 1000.0, 1e-6);
        CHECK(scan.gamma_hits.empty());
        CHECK(scan.dual_hits.empty());
    }
    SUBCASE("sheared lattice: dual hits only") {
        Mat b(2, 2);
        b << 1.0, 0.5 * (1.0 + std::sqrt(5.0)), 0.0, 1.0; // second coords integral
        IrrationalityScan scan = irrationality_scan(Lattice(b), split, 50.0, 1e-6);
        CHECK(scan.gamma_hits.empty());
        CHECK(!scan.dual_hits.empty());
    }
}

TEST_CASE("liouville construction follows the greedy recurrence") {
    SUBCASE("slow gauge log(1+r)") {
        LiouvilleData data = liouville_number(PsiFunction::log_power(1.0, 1.0), 3);
        REQUIRE(data.depth() == 3);
        CHECK(data.exponents[0] == 1);
        CHECK(data.exponents[1] == 5);
        CHECK(data.exponents[2] == 53);
        CHECK(data.a_approx == doctest::Approx(std::exp2(-1) + std::exp2(-5) + std::exp2(-53)));
        data.verify(); // throws on failure
        CHECK(bigint_to_string(data.q(2)) == "32");
        CHECK(bigint_to_string(data.m(2)) == "17");
        CHECK(data.fractional_part(1) ==
              doctest::Approx(std::exp2(-4) + std::exp2(-52)).epsilon(1e-15));
        CHECK(data.fractional_part(2) == doctest::Approx(std::exp2(-48)));
        CHECK(data.fractional_part(3) == 0.0);
    }
    SUBCASE("depth 1 is vacuous beyond the first level") {
        LiouvilleData data = liouville_number(PsiFunction::log_power(1.0, 1.0), 1);
        CHECK(data.depth() == 1);
        CHECK(data.a_approx == doctest::Approx(0.5));
        data.verify();
    }
    SUBCASE("speed-1 gauge doubles the exponents, exact for depth 10") {
        LiouvilleData data = liouville_number(PsiFunction::power_law(1.0, 1.0), 10);
        REQUIRE(data.depth() == 10);
        for (int k = 1; k < 10; ++k)
            CHECK(data.exponents[(std::size_t)k] == 2 * data.exponents[(std::size_t)k - 1] + 1);
        CHECK(data.exponents[9] == 1023);
        data.verify();
        for (int n = 1; n < 10; ++n) CHECK(data.verification_margin(n) >= 0.0);
    }
    SUBCASE("bit budget is enforced") {
        CHECK_THROWS_AS((void)liouville_number(PsiFunction::log_power(1.0, 1.0), 5),
                        BudgetError);
    }
}

TEST_CASE("liouville data round-trips through its own verification") {
    LiouvilleData data = liouville_number(PsiFunction::log_power(1.0, 1.0), 3);
    LiouvilleData copy;
    copy.exponents = data.exponents;
    copy.psi = data.psi;
    copy.a_approx = data.a_approx;
    copy.verify();
    // tampered data fails
    LiouvilleData bad = copy;
    bad.exponents[2] = 7; // too close to c_2 for the gauge
    CHECK_THROWS_AS(bad.verify(), NumericalError);
}

TEST_CASE("liouvillean lattice witnesses are exact") {
    SplitSpace split(1, 1);
    LiouvilleanLattice built =
        liouvillean_lattice(PsiFunction::log_power(1.0, 1.0), 3, split, std::nullopt);
    REQUIRE(built.witnesses.size() == 3);
    const LiouvilleData& data = built.data;
    for (const auto& w : built.witnesses) {
        int n = w.level;
        CHECK(w.coeff_a == data.q(n));
        CHECK(w.coeff_unit == -data.m(n));
        // |xi_left| = |q_n - m_n| < q_n, and the gauge inequality transfers:
        // |q_n - m_n| < q_n <= psi(||q_n a||^{-1}) exactly
        BigInt left = data.left_component(n);
        if (left < 0) left = -left;
        CHECK(left < data.q(n));
        CHECK(data.verification_margin(n) >= 0.0);
    }
    SUBCASE("float shadow agrees with the exact data at shallow levels") {
        // basis column (a, 1): a has exponents 1, 5, 53 => exactly a double
        CHECK(built.lattice.basis()(0, 0) ==
              std::exp2(-1) + std::exp2(-5) + std::exp2(-53));
        // witness projections: down = ||q_n a||, left = q_n - m_n
        CHECK(built.witnesses[0].point[0] == doctest::Approx(data.fractional_part(1)));
        CHECK(built.witnesses[1].point[1] == doctest::Approx(15.0));
    }
    SUBCASE("witness points are genuine lattice points of the float shadow") {
        // shallow levels only: coords fit in doubles there
        for (int n = 1; n <= 2; ++n) {
            const auto& w = built.witnesses[(std::size_t)n - 1];
            double qa = w.coeff_a.convert_to<double>();
            double mu = w.coeff_unit.convert_to<double>();
            Vec p = qa * built.lattice.basis().col(0) + mu * built.lattice.basis().col(1);
            CHECK(p[0] == doctest::Approx(w.point[0]).epsilon(1e-12));
            CHECK(p[1] == doctest::Approx(w.point[1]).epsilon(1e-12));
        }
    }
}

TEST_CASE("liouvillean lattice with a tail block") {
    SplitSpace split(2, 2);
    LiouvilleanLattice built = liouvillean_lattice(PsiFunction::power_law(1.0, 1.0), 4, split,
                                                   Lattice::integer_lattice(2));
    CHECK(built.lattice.dim() == 4);
    CHECK(built.lattice.covolume() ==
          doctest::Approx(std::abs(built.data.a_approx - 1.0)).epsilon(1e-12));
}

TEST_CASE("predicted exponents") {
    PsiFunction mu1 = PsiFunction::power_law(1.0, 1.0);
    SUBCASE("ball search") {
        PredictedExponent p = predicted_exponent(2, 1, 1.0, mu1, SearchClass::Ball);
        CHECK(p.power_law);
        CHECK(p.exponent == doctest::Approx(1.5));
    }
    SUBCASE("finite perimeter search") {
        PredictedExponent p = predicted_exponent(2, 1, 1.0, mu1, SearchClass::FinitePerimeter);
        CHECK(p.exponent == doctest::Approx(1.5));
    }
    SUBCASE("slow gauge returns the descriptor pair") {
        PredictedExponent p = predicted_exponent(2, 1, 1.0, PsiFunction::log_power(1.0, 1.0),
                                                 SearchClass::Ball);
        CHECK_FALSE(p.power_law);
        CHECK(p.t_power == doctest::Approx(2.0));
        CHECK(p.psi_power == doctest::Approx(-1.0));
    }
}
