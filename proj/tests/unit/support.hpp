#pragma once

#include "cvxpnpl/error.hpp"
#include "cvxpnpl/geometry.hpp"
#include "cvxpnpl/rng.hpp"

#include <Eigen/Geometry>
#include <gtest/gtest.h>

// Passes only if `stmt` throws cvxpnpl::Error carrying `expected`.
#define EXPECT_ERROR_CODE(stmt, expected)                                                                           \
    do {                                                                                                            \
        bool thrown_ = false;                                                                                       \
        try {                                                                                                       \
            (void)(stmt);                                                                                           \
        } catch (const ::cvxpnpl::Error &e_) {                                                                      \
            thrown_ = true;                                                                                         \
            EXPECT_EQ(e_.code(), expected) << e_.what();                                                            \
        }                                                                                                           \
        EXPECT_TRUE(thrown_) << #stmt " did not throw";                                                             \
    } while (0)

namespace cvxpnpl::testing {

inline Vec3 normal3(Rng &rng) { return Vec3(rng.normal(), rng.normal(), rng.normal()); }

inline Mat3 normal33(Rng &rng) {
    Mat3 m;
    for (int k = 0; k < 9; ++k)
        m(k) = rng.normal();
    return m;
}

} // namespace cvxpnpl::testing
