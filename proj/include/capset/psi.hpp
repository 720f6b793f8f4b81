#ifndef CAPSET_PSI_HPP
#define CAPSET_PSI_HPP

#include "capset/types.hpp"

#include <cmath>
#include <string>

namespace capset {

enum class PsiKind { PowerLaw, LogPower };
enum class GrowthClass { SpeedMu, Slow };

// Increasing gauge psi with psi(r) -> infinity and a closed-form inverse.
// PowerLaw: psi(r) = c r^mu (grows at speed mu); LogPower: psi(r) =
// c log(1+r)^beta (grows slowly).
struct PsiFunction {
    PsiKind kind = PsiKind::PowerLaw;
    double c = 1.0;
    double exponent = 1.0; // mu for PowerLaw, beta for LogPower

    static PsiFunction power_law(double c, double mu) {
        if (!(c > 0) || !(mu > 0)) throw ConfigError("psi: power law needs c, mu > 0");
        return {PsiKind::PowerLaw, c, mu};
    }
    static PsiFunction log_power(double c, double beta) {
        if (!(c > 0) || !(beta > 0)) throw ConfigError("psi: log power needs c, beta > 0");
        return {PsiKind::LogPower, c, beta};
    }

    GrowthClass growth_class() const {
        return kind == PsiKind::PowerLaw ? GrowthClass::SpeedMu : GrowthClass::Slow;
    }

    double operator()(double r) const {
        if (!(r > 0)) throw ConfigError("psi: argument must be positive");
        return kind == PsiKind::PowerLaw ? c * std::pow(r, exponent)
                                         : c * std::pow(std::log1p(r), exponent);
    }

    double inverse(double y) const {
        if (!(y > 0)) throw ConfigError("psi inverse: argument must be positive");
        return kind == PsiKind::PowerLaw ? std::pow(y / c, 1.0 / exponent)
                                         : std::expm1(std::pow(y / c, 1.0 / exponent));
    }

    std::string describe() const {
        return kind == PsiKind::PowerLaw
                   ? "c r^mu, c=" + std::to_string(c) + ", mu=" + std::to_string(exponent)
                   : "c log(1+r)^beta, c=" + std::to_string(c) +
                         ", beta=" + std::to_string(exponent);
    }
};

} // namespace capset

#endif
