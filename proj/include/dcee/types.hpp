#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace dcee {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Axis-aligned box of admissible outputs; one [lo, hi] pair per component.
struct Box {
    Vec lo;
    Vec hi;

    [[nodiscard]] Eigen::Index dim() const { return lo.size(); }
    [[nodiscard]] bool contains(const Vec& y) const {
        return y.size() == lo.size() && (y.array() >= lo.array()).all() && (y.array() <= hi.array()).all();
    }
    [[nodiscard]] Vec clamp(const Vec& y) const { return y.cwiseMax(lo).cwiseMin(hi); }

    static Box interval(double lo, double hi) {
        Box b;
        b.lo = Vec::Constant(1, lo);
        b.hi = Vec::Constant(1, hi);
        return b;
    }
};

inline Vec scalar_vec(double v) { return Vec::Constant(1, v); }

} // namespace dcee
