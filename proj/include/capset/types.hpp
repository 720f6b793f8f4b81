#ifndef CAPSET_TYPES_HPP
#define CAPSET_TYPES_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace capset {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IVec = Eigen::VectorXi;

// Orthogonal decomposition of the ambient space into a physical part
// (dimension d_down, where point sets live and regions dilate) and an
// internal part (dimension d_left, where windows live).
struct SplitSpace {
    int d_down = 1;
    int d_left = 1;

    SplitSpace() = default;
    SplitSpace(int down, int left) : d_down(down), d_left(left) {
        if (down < 1 || left < 1)
            throw std::invalid_argument("SplitSpace: both factors need dimension >= 1");
    }

    int dim() const { return d_down + d_left; }

    Vec project_down(const Vec& v) const { return v.head(d_down); }
    Vec project_left(const Vec& v) const { return v.tail(d_left); }

    Vec assemble(const Vec& down, const Vec& left) const {
        Vec v(dim());
        v.head(d_down) = down;
        v.tail(d_left) = left;
        return v;
    }
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace capset

#endif
