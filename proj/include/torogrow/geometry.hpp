#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>

namespace torogrow {

inline constexpr double kTwoPi = 6.28318530717958647692528676655900577;

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

template <std::size_t N>
inline std::array<double, N> operator+(const std::array<double, N>& a, const std::array<double, N>& b) {
    std::array<double, N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + b[i];
    return r;
}

template <std::size_t N>
inline std::array<double, N> operator-(const std::array<double, N>& a, const std::array<double, N>& b) {
    std::array<double, N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] - b[i];
    return r;
}

template <std::size_t N>
inline std::array<double, N> operator*(double s, const std::array<double, N>& a) {
    std::array<double, N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = s * a[i];
    return r;
}

template <std::size_t N>
inline double dot(const std::array<double, N>& a, const std::array<double, N>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
    return s;
}

template <std::size_t N>
inline double norm(const std::array<double, N>& a) {
    return std::sqrt(dot(a, a));
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Dense fixed-size square matrix.
template <std::size_t N>
struct Mat {
    std::array<std::array<double, N>, N> a{};

    static Mat identity() {
        Mat m;
        for (std::size_t i = 0; i < N; ++i) m.a[i][i] = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return a[i][j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i][j]; }

    Mat operator*(const Mat& o) const {
        Mat r;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t k = 0; k < N; ++k) {
                const double v = a[i][k];
                if (v == 0.0) continue;
                for (std::size_t j = 0; j < N; ++j) r.a[i][j] += v * o.a[k][j];
            }
        return r;
    }

    std::array<double, N> operator*(const std::array<double, N>& x) const {
        std::array<double, N> r{};
        for (std::size_t i = 0; i < N; ++i) r[i] = dot(a[i], x);
        return r;
    }

    Mat operator-(const Mat& o) const {
        Mat r;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) r.a[i][j] = a[i][j] - o.a[i][j];
        return r;
    }

    Mat operator+(const Mat& o) const {
        Mat r;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) r.a[i][j] = a[i][j] + o.a[i][j];
        return r;
    }

    Mat scaled(double s) const {
        Mat r;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) r.a[i][j] = s * a[i][j];
        return r;
    }

    double max_abs() const {
        double m = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) {
                if (!std::isfinite(a[i][j])) return std::numeric_limits<double>::infinity();
                m = std::max(m, std::abs(a[i][j]));
            }
        return m;
    }

    double frobenius() const {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) s += a[i][j] * a[i][j];
        return std::sqrt(s);
    }
};

using Mat2 = Mat<2>;
using Mat3 = Mat<3>;

inline double det(const Mat2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

inline double det(const Mat3& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

// Square matrix of runtime dimension 2 or 3, used at module boundaries where
// the system dimension is only known from the spec variant.
struct MatN {
    std::size_t n = 0;
    std::array<std::array<double, 3>, 3> a{};

    MatN() = default;
    explicit MatN(std::size_t dim) : n(dim) {}
    MatN(const Mat2& m) : n(2) {
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) a[i][j] = m(i, j);
    }
    MatN(const Mat3& m) : n(3) {
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) a[i][j] = m(i, j);
    }

    double& operator()(std::size_t i, std::size_t j) { return a[i][j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i][j]; }

    MatN operator*(const MatN& o) const {
        MatN r(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t j = 0; j < n; ++j) r.a[i][j] += a[i][k] * o.a[k][j];
        return r;
    }

    MatN operator-(const MatN& o) const {
        MatN r(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) r.a[i][j] = a[i][j] - o.a[i][j];
        return r;
    }

    MatN scaled(double s) const {
        MatN r(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) r.a[i][j] = s * a[i][j];
        return r;
    }

    double max_abs() const {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (!std::isfinite(a[i][j])) return std::numeric_limits<double>::infinity();
                m = std::max(m, std::abs(a[i][j]));
            }
        return m;
    }

    double determinant() const {
        if (n == 2) {
            return a[0][0] * a[1][1] - a[0][1] * a[1][0];
        }
        return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
               a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    }
};

// Kahan compensated accumulator.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }

    double value() const { return sum; }
};

}  // namespace torogrow
