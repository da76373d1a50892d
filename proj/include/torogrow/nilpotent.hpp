#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "torogrow/errors.hpp"
#include "torogrow/geometry.hpp"

namespace torogrow {

// A = column * row^T with row . column = 0.  The column is normalized to unit
// length with its first nonzero entry positive; the row carries the scale.
template <std::size_t N>
struct Rank1Factorization {
    std::array<double, N> column{};
    std::array<double, N> row{};
    double residual = 0.0;  // Frobenius norm of A - column row^T, relative to |A|
};

namespace detail {

template <std::size_t N>
inline void orient_first_nonzero_positive(std::array<double, N>& v) {
    for (std::size_t i = 0; i < N; ++i) {
        if (std::abs(v[i]) > 1e-12) {
            if (v[i] < 0.0)
                for (auto& e : v) e = -e;
            return;
        }
    }
}

template <std::size_t N>
inline std::array<double, N> matvec_t(const Mat<N>& m, const std::array<double, N>& v) {
    std::array<double, N> r{};
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t i = 0; i < N; ++i) r[j] += v[i] * m(i, j);
    return r;
}

}  // namespace detail

// Rank-one factorization of a square-zero matrix (2x2 or 3x3).
// tol_rel scales the zero test for A^2; the reconstruction gate doubles as
// the numerical-rank check (a square-zero matrix of the right shape has rank
// one, so a large residual means the input was bad).
template <std::size_t N>
Rank1Factorization<N> square_zero_factor(const Mat<N>& a, double tol_rel = 1e-9) {
    static_assert(N == 2 || N == 3);
    const double na = a.frobenius();
    if (na == 0.0) throw InputError("square_zero_factor: zero matrix");
    const double n2 = (a * a).frobenius();
    if (n2 > tol_rel * na * na)
        throw StructuralError("square_zero_factor: input is not square-zero (|A^2| = " +
                              std::to_string(n2) + ")");

    // largest column of A is proportional to the factor column
    std::size_t best = 0;
    double best_norm = -1.0;
    for (std::size_t j = 0; j < N; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i) s += a(i, j) * a(i, j);
        if (s > best_norm) {
            best_norm = s;
            best = j;
        }
    }
    Rank1Factorization<N> f;
    for (std::size_t i = 0; i < N; ++i) f.column[i] = a(i, best);
    const double cn = norm(f.column);
    for (auto& e : f.column) e /= cn;
    detail::orient_first_nonzero_positive(f.column);

    // least squares for the row: with a unit column, row = A^T column
    f.row = detail::matvec_t(a, f.column);

    double res = 0.0;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) {
            const double d = a(i, j) - f.column[i] * f.row[j];
            res += d * d;
        }
    f.residual = std::sqrt(res) / na;
    if (f.residual > std::max(1e-12, tol_rel))
        throw StructuralError("square_zero_factor: numerical rank >= 2 (residual " +
                              std::to_string(f.residual) + ")");
    return f;
}

enum class PairKind { CommonColumn, CommonRow };

// Joint structure of two square-zero 3x3 matrices with vanishing products:
// either A = s b^T and B = s c^T share the column s, or A = b s^T and
// B = c s^T share the row s.
struct PairClassification {
    PairKind kind = PairKind::CommonColumn;
    Vec3 shared{};  // unit vector, first nonzero entry positive
    Vec3 vec_a{};   // second factor of A (row for CommonColumn, column for CommonRow)
    Vec3 vec_b{};   // second factor of B
    double residual = 0.0;
};

inline PairClassification classify_pair(const Mat3& a, const Mat3& b, double tol_rel = 1e-9) {
    const double na = a.frobenius(), nb = b.frobenius();
    if (na == 0.0 || nb == 0.0) throw InputError("classify_pair: zero matrix");
    auto check = [&](const Mat3& m, double bound, const char* label) {
        if (m.frobenius() > tol_rel * bound)
            throw StructuralError(std::string("classify_pair: ") + label + " is not zero");
    };
    check(a * a, na * na, "A^2");
    check(b * b, nb * nb, "B^2");
    check(a * b, na * nb, "AB");
    check(b * a, na * nb, "BA");

    const auto fa = square_zero_factor(a, tol_rel);
    const auto fb = square_zero_factor(b, tol_rel);

    Vec3 row_a_unit = fa.row;
    const double ra_norm = norm(row_a_unit);
    for (auto& e : row_a_unit) e /= ra_norm;
    Vec3 row_b_unit = fb.row;
    const double rb_norm = norm(row_b_unit);
    for (auto& e : row_b_unit) e /= rb_norm;

    // third direction of the proof's orthogonal frame
    const Vec3 o = cross(fa.column, row_a_unit);
    const double d12 = std::abs(dot(fb.column, o));
    const double d22 = std::abs(dot(row_b_unit, o));

    PairClassification out;
    if (d12 <= d22) {
        out.kind = PairKind::CommonColumn;
        out.shared = fa.column;
        out.vec_a = detail::matvec_t(a, out.shared);
        out.vec_b = detail::matvec_t(b, out.shared);
    } else {
        out.kind = PairKind::CommonRow;
        out.shared = row_a_unit;
        detail::orient_first_nonzero_positive(out.shared);
        out.vec_a = a * out.shared;
        out.vec_b = b * out.shared;
    }

    auto recon_residual = [&](const Mat3& m, const Vec3& col, const Vec3& row, double nm) {
        double res = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                const double d = m(i, j) - col[i] * row[j];
                res += d * d;
            }
        return std::sqrt(res) / nm;
    };
    if (out.kind == PairKind::CommonColumn) {
        out.residual = std::max(recon_residual(a, out.shared, out.vec_a, na),
                                recon_residual(b, out.shared, out.vec_b, nb));
    } else {
        out.residual = std::max(recon_residual(a, out.vec_a, out.shared, na),
                                recon_residual(b, out.vec_b, out.shared, nb));
    }
    if (out.residual > std::max(1e-12, tol_rel))
        throw StructuralError("classify_pair: reconstruction failed (residual " +
                              std::to_string(out.residual) + ")");
    return out;
}

}  // namespace torogrow
