#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>

#include "torogrow/errors.hpp"
#include "torogrow/geometry.hpp"

namespace torogrow {

// Fractional part in [0, 1).  Inputs that round up to the next integer
// (x - floor(x) == 1.0 in double arithmetic) map to 0.
inline double wrap01(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r = 0.0;
    return r;
}

// Signed distance to the nearest integer, in [-1/2, 1/2).
inline double wrap_centered(double x) {
    const double r = wrap01(x);
    return r >= 0.5 ? r - 1.0 : r;
}

// Point of T^d = R^d / Z^d with d in {1, 2, 3}; every coordinate in [0, 1).
struct TorusPoint {
    std::size_t dim = 0;
    std::array<double, 3> x{};

    TorusPoint() = default;
    TorusPoint(std::size_t d, const std::array<double, 3>& coords) : dim(d), x(coords) {}

    double operator[](std::size_t i) const { return x[i]; }

    Vec2 as_vec2() const { return {x[0], x[1]}; }
    Vec3 as_vec3() const { return {x[0], x[1], x[2]}; }
};

inline TorusPoint reduce(std::span<const double> coords) {
    const std::size_t d = coords.size();
    if (d < 1 || d > 3) throw InputError("reduce: dimension must be 1, 2 or 3");
    TorusPoint p;
    p.dim = d;
    for (std::size_t i = 0; i < d; ++i) {
        if (!std::isfinite(coords[i]))
            throw InputError("reduce: non-finite coordinate at index " + std::to_string(i));
        p.x[i] = wrap01(coords[i]);
    }
    return p;
}

inline TorusPoint reduce(std::initializer_list<double> coords) {
    return reduce(std::span<const double>(coords.begin(), coords.size()));
}

inline TorusPoint reduce(const Vec2& v) { return reduce(std::span<const double>(v.data(), 2)); }
inline TorusPoint reduce(const Vec3& v) { return reduce(std::span<const double>(v.data(), 3)); }

// Max of per-coordinate distances on the torus.
inline double torus_distance(const TorusPoint& a, const TorusPoint& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim; ++i) m = std::max(m, std::abs(wrap_centered(a.x[i] - b.x[i])));
    return m;
}

}  // namespace torogrow
