#pragma once

#include <array>
#include <cstdlib>

#include "torogrow/errors.hpp"
#include "torogrow/geometry.hpp"

namespace torogrow {

// 3x3 integer matrix, used as the linear part of a torus automorphism.
struct IMat3 {
    std::array<std::array<long long, 3>, 3> m{};

    static IMat3 identity() {
        IMat3 k;
        for (int i = 0; i < 3; ++i) k.m[i][i] = 1;
        return k;
    }

    long long& operator()(int i, int j) { return m[i][j]; }
    long long operator()(int i, int j) const { return m[i][j]; }

    long long determinant() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }

    bool is_unimodular() const {
        const long long d = determinant();
        return d == 1 || d == -1;
    }

    bool is_lower_unitriangular() const {
        return m[0][0] == 1 && m[1][1] == 1 && m[2][2] == 1 && m[0][1] == 0 && m[0][2] == 0 &&
               m[1][2] == 0;
    }

    // Exact inverse; only valid for unimodular matrices (adjugate over det).
    IMat3 inverse() const {
        const long long d = determinant();
        if (d != 1 && d != -1) throw InputError("IMat3::inverse: matrix is not unimodular");
        IMat3 r;
        r.m[0][0] = d * (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
        r.m[0][1] = d * (m[0][2] * m[2][1] - m[0][1] * m[2][2]);
        r.m[0][2] = d * (m[0][1] * m[1][2] - m[0][2] * m[1][1]);
        r.m[1][0] = d * (m[1][2] * m[2][0] - m[1][0] * m[2][2]);
        r.m[1][1] = d * (m[0][0] * m[2][2] - m[0][2] * m[2][0]);
        r.m[1][2] = d * (m[0][2] * m[1][0] - m[0][0] * m[1][2]);
        r.m[2][0] = d * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        r.m[2][1] = d * (m[0][1] * m[2][0] - m[0][0] * m[2][1]);
        r.m[2][2] = d * (m[0][0] * m[1][1] - m[0][1] * m[1][0]);
        return r;
    }

    Mat3 as_real() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = static_cast<double>(m[i][j]);
        return r;
    }
};

struct UnipotentGrowth {
    int tau = 0;     // 0 for the identity, otherwise 1 or 2
    Mat3 limit{};    // limit of n^{-tau} K^n (zero matrix when tau == 0)
};

// Polynomial growth of powers of a lower-unitriangular matrix.  The powers
// have the closed form
//   (K^n)_{21} = n K21,  (K^n)_{32} = n K32,
//   (K^n)_{31} = n K31 + n(n-1)/2 * K21 K32,
// so n^{-2} K^n converges to the matrix with single entry K21*K32/2 when
// K21*K32 != 0, and n^{-1} K^n converges to the strictly-lower part otherwise.
inline UnipotentGrowth unipotent_power_growth(const IMat3& k) {
    if (!k.is_lower_unitriangular())
        throw InputError("unipotent_power_growth: matrix is not lower unitriangular");
    const long long k21 = k(1, 0), k31 = k(2, 0), k32 = k(2, 1);
    UnipotentGrowth g;
    if (k21 == 0 && k31 == 0 && k32 == 0) {
        g.tau = 0;
        return g;
    }
    if (k21 != 0 && k32 != 0) {
        g.tau = 2;
        g.limit(2, 0) = static_cast<double>(k21) * static_cast<double>(k32) / 2.0;
        return g;
    }
    g.tau = 1;
    g.limit(1, 0) = static_cast<double>(k21);
    g.limit(2, 0) = static_cast<double>(k31);
    g.limit(2, 1) = static_cast<double>(k32);
    return g;
}

}  // namespace torogrow
