#pragma once

#include "cvxpnpl/geometry.hpp"

#include <vector>

namespace cvxpnpl {

/// Affine parameterization of the relaxed solution space:
/// r̃ = v0 + Σ α_k v_k, with v0[9] = 1 and v_k[9] = 0.
struct SolutionBasis {
    int K = 1;
    Vec10 v0 = Vec10::Zero();
    std::vector<Vec10> vk;

    /// v0 + Σ coords[k] v_k. `coords` needs K − 1 entries.
    Vec10 point(const Eigen::Ref<const Eigen::VectorXd> &coords) const {
        Vec10 x = v0;
        for (std::size_t k = 0; k < vk.size(); ++k)
            x += coords(static_cast<Eigen::Index>(k)) * vk[k];
        return x;
    }

    /// Coordinates of x − v0 along the (orthonormal) directions.
    Eigen::VectorXd coordinates(const Vec10 &x) const {
        Eigen::VectorXd c(static_cast<Eigen::Index>(vk.size()));
        for (std::size_t k = 0; k < vk.size(); ++k)
            c(static_cast<Eigen::Index>(k)) = vk[k].dot(x - v0);
        return c;
    }
};

} // namespace cvxpnpl
