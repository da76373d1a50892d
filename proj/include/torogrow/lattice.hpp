#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>

#include "torogrow/errors.hpp"

namespace torogrow {

using IVec3 = std::array<long long, 3>;

inline long long idot(const IVec3& a, const IVec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline IVec3 icross(const IVec3& a, const IVec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline long long gcd_ll(long long a, long long b) {
    a = std::llabs(a);
    b = std::llabs(b);
    while (b != 0) {
        const long long t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// Extended gcd: returns g = gcd(a,b) and (x,y) with a x + b y = g.
inline long long extended_gcd(long long a, long long b, long long& x, long long& y) {
    if (b == 0) {
        x = (a >= 0) ? 1 : -1;
        y = 0;
        return std::llabs(a);
    }
    long long x1, y1;
    const long long g = extended_gcd(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

// Solution of a x + b y = 1 with minimal x^2 + y^2 (ties resolved toward the
// larger x), assuming gcd(a, b) = 1.
inline std::array<long long, 2> minimal_bezout(long long a, long long b) {
    if (a == 0 && b == 0) throw InputError("minimal_bezout: zero arguments");
    long long x0, y0;
    const long long g = extended_gcd(a, b, x0, y0);
    if (g != 1) throw InputError("minimal_bezout: arguments are not coprime");
    auto norm2 = [](long long x, long long y) { return x * x + y * y; };
    // general solution: (x0 + t b, y0 - t a)
    long long bx = x0, by = y0;
    const double denom = static_cast<double>(a) * a + static_cast<double>(b) * b;
    const double tstar = (static_cast<double>(a) * y0 - static_cast<double>(b) * x0) / denom;
    const long long t_lo = static_cast<long long>(std::floor(tstar)) - 1;
    for (long long t = t_lo; t <= t_lo + 3; ++t) {
        const long long x = x0 + t * b, y = y0 - t * a;
        const long long nb = norm2(bx, by), nn = norm2(x, y);
        if (nn < nb || (nn == nb && x > bx)) {
            bx = x;
            by = y;
        }
    }
    return {bx, by};
}

// Generators of G(c) = {m in Z^3 : m . c = 0} together with the fullness
// certificate for the image lattice {(a.m, b.m)}.
struct LatticeBasis {
    IVec3 c{};
    IVec3 a{};
    IVec3 b{};
    std::array<long long, 3> minors{};  // 2x2 minors of the stacked matrix [a; b]
    long long minor_gcd = 0;            // 1 certifies Lambda(a, b) = Z^2
};

inline IVec3 primitive_part(const IVec3& c) {
    if (c[0] == 0 && c[1] == 0 && c[2] == 0) throw InputError("primitive_part: zero vector");
    const long long g = gcd_ll(gcd_ll(c[0], c[1]), c[2]);
    return {c[0] / g, c[1] / g, c[2] / g};
}

inline bool is_primitive(const IVec3& c) {
    if (c[0] == 0 && c[1] == 0 && c[2] == 0) return false;
    return gcd_ll(gcd_ll(c[0], c[1]), c[2]) == 1;
}

inline std::array<long long, 3> two_by_two_minors(const IVec3& a, const IVec3& b) {
    return {a[0] * b[1] - a[1] * b[0], a[0] * b[2] - a[2] * b[0], a[1] * b[2] - a[2] * b[1]};
}

// gcd-of-minors test for Lambda(a, b) = Z^2.
struct FullImageResult {
    bool full = false;
    long long minor_gcd = 0;
};

inline FullImageResult is_full_image(const IVec3& a, const IVec3& b) {
    const auto x = icross(a, b);
    if (x[0] == 0 && x[1] == 0 && x[2] == 0)
        throw InputError("is_full_image: rows are linearly dependent");
    const auto mins = two_by_two_minors(a, b);
    const long long g = gcd_ll(gcd_ll(mins[0], mins[1]), mins[2]);
    return {g == 1, g};
}

// Generators of G(c) for primitive c, following the gcd factorization
// p1 = gcd(c2,c3), p2 = gcd(c3,c1), p3 = gcd(c1,c2), c1 = k1 p2 p3,
// c2 = p1 k2 p3, c3 = p1 p2 k3, k2 x + k3 y = 1:
//   a = (p1, -p2 k1 x, -p3 k1 y),  b = (0, -p2 k3, p3 k2).
// Zero entries of c are covered by gcd(0, n) = |n| and by treating gcd(0, 0)
// as 1 in the factor extraction; the only degenerate direction left out by
// the formulas is c2 = c3 = 0 (then k2 = k3 = 0 and the Bezout equation is
// unsolvable), where G(c) is the coordinate plane.
inline LatticeBasis orthogonal_generators(const IVec3& c) {
    if (c[0] == 0 && c[1] == 0 && c[2] == 0)
        throw InputError("orthogonal_generators: zero vector");
    if (!is_primitive(c))
        throw InputError("orthogonal_generators: input is not primitive (apply primitive_part first)");

    LatticeBasis basis;
    basis.c = c;

    if (c[1] == 0 && c[2] == 0) {
        // c = (+-1, 0, 0)
        basis.a = {0, 1, 0};
        basis.b = {0, 0, 1};
    } else {
        auto gcd1 = [](long long u, long long v) {
            const long long g = gcd_ll(u, v);
            return g == 0 ? 1 : g;
        };
        const long long p1 = gcd1(c[1], c[2]);
        const long long p2 = gcd1(c[2], c[0]);
        const long long p3 = gcd1(c[0], c[1]);
        const long long k1 = c[0] / (p2 * p3);
        const long long k2 = c[1] / (p1 * p3);
        const long long k3 = c[2] / (p1 * p2);
        const auto xy = minimal_bezout(k2, k3);
        const long long x = xy[0], y = xy[1];
        basis.a = {p1, -p2 * k1 * x, -p3 * k1 * y};
        basis.b = {0, -p2 * k3, p3 * k2};
    }

    if (idot(basis.a, c) != 0 || idot(basis.b, c) != 0)
        throw StructuralError("orthogonal_generators: generator is not orthogonal to c");
    basis.minors = two_by_two_minors(basis.a, basis.b);
    basis.minor_gcd = gcd_ll(gcd_ll(basis.minors[0], basis.minors[1]), basis.minors[2]);
    if (basis.minor_gcd != 1)
        throw StructuralError("orthogonal_generators: fullness certificate failed (minor gcd " +
                              std::to_string(basis.minor_gcd) + ")");
    return basis;
}

// Coordinates of m in the basis (a, b) of G(c), or nullopt when m is not
// orthogonal to c.  Solved exactly on an invertible 2x2 subsystem and
// verified against the full vector.
inline std::optional<std::array<long long, 2>> membership(const LatticeBasis& basis, const IVec3& m) {
    if (idot(m, basis.c) != 0) return std::nullopt;
    const auto& a = basis.a;
    const auto& b = basis.b;
    static constexpr int rows[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto& r : rows) {
        const int i = r[0], j = r[1];
        const long long d = a[i] * b[j] - a[j] * b[i];
        if (d == 0) continue;
        const long long un = m[i] * b[j] - m[j] * b[i];
        const long long vn = a[i] * m[j] - a[j] * m[i];
        if (un % d != 0 || vn % d != 0) break;
        const long long u = un / d, v = vn / d;
        if (u * a[0] + v * b[0] == m[0] && u * a[1] + v * b[1] == m[1] &&
            u * a[2] + v * b[2] == m[2])
            return std::array<long long, 2>{u, v};
        break;
    }
    throw StructuralError("membership: orthogonal vector is not an integer combination of the basis");
}

}  // namespace torogrow
