#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "torogrow/geometry.hpp"
#include "torogrow/torus.hpp"

namespace torogrow {

// Lift of a circle map T -> T: an integer linear term plus a trigonometric
// polynomial.  value(x + 1) = value(x) + degree holds exactly because the
// periodic part is evaluated on the wrapped argument.
struct CircleFunction {
    int degree = 0;
    double constant = 0.0;
    std::vector<double> cos_coeffs;  // frequency k = index + 1
    std::vector<double> sin_coeffs;

    static CircleFunction constant_map(double c) {
        CircleFunction f;
        f.constant = c;
        return f;
    }

    static CircleFunction linear(int d) {
        CircleFunction f;
        f.degree = d;
        return f;
    }

    bool is_constant() const {
        if (degree != 0) return false;
        for (double a : cos_coeffs)
            if (a != 0.0) return false;
        for (double b : sin_coeffs)
            if (b != 0.0) return false;
        return true;
    }

    std::size_t harmonics() const { return std::max(cos_coeffs.size(), sin_coeffs.size()); }

    double value(double x) const {
        const double u = wrap01(x);
        double v = constant + static_cast<double>(degree) * x;
        const std::size_t m = harmonics();
        if (m == 0) return v;
        const double c1 = std::cos(kTwoPi * u);
        const double s1 = std::sin(kTwoPi * u);
        double ck = c1, sk = s1;
        for (std::size_t k = 0; k < m; ++k) {
            if (k > 0) {
                const double c = ck * c1 - sk * s1;
                const double s = sk * c1 + ck * s1;
                ck = c;
                sk = s;
            }
            if (k < cos_coeffs.size()) v += cos_coeffs[k] * ck;
            if (k < sin_coeffs.size()) v += sin_coeffs[k] * sk;
        }
        return v;
    }

    double derivative(double x) const {
        const double u = wrap01(x);
        double v = static_cast<double>(degree);
        const std::size_t m = harmonics();
        if (m == 0) return v;
        const double c1 = std::cos(kTwoPi * u);
        const double s1 = std::sin(kTwoPi * u);
        double ck = c1, sk = s1;
        for (std::size_t k = 0; k < m; ++k) {
            if (k > 0) {
                const double c = ck * c1 - sk * s1;
                const double s = sk * c1 + ck * s1;
                ck = c;
                sk = s;
            }
            const double w = kTwoPi * static_cast<double>(k + 1);
            if (k < cos_coeffs.size()) v -= w * cos_coeffs[k] * sk;
            if (k < sin_coeffs.size()) v += w * sin_coeffs[k] * ck;
        }
        return v;
    }

    void value_and_derivative(double x, double& val, double& deriv) const {
        const double u = wrap01(x);
        val = constant + static_cast<double>(degree) * x;
        deriv = static_cast<double>(degree);
        const std::size_t m = harmonics();
        if (m == 0) return;
        const double c1 = std::cos(kTwoPi * u);
        const double s1 = std::sin(kTwoPi * u);
        double ck = c1, sk = s1;
        for (std::size_t k = 0; k < m; ++k) {
            if (k > 0) {
                const double c = ck * c1 - sk * s1;
                const double s = sk * c1 + ck * s1;
                ck = c;
                sk = s;
            }
            const double w = kTwoPi * static_cast<double>(k + 1);
            if (k < cos_coeffs.size()) {
                val += cos_coeffs[k] * ck;
                deriv -= w * cos_coeffs[k] * sk;
            }
            if (k < sin_coeffs.size()) {
                val += sin_coeffs[k] * sk;
                deriv += w * sin_coeffs[k] * ck;
            }
        }
    }
};

// One frequency pair of a function on T^2.
struct Torus2Term {
    int k1 = 0;
    int k2 = 0;
    double cos_coeff = 0.0;
    double sin_coeff = 0.0;
};

// Lift of a map T^2 -> T: integer degrees (d1, d2) plus a sparse table of
// trigonometric terms a cos(2pi(k1 x1 + k2 x2)) + b sin(...).
struct Torus2Function {
    std::array<int, 2> degrees{0, 0};
    double constant = 0.0;
    std::vector<Torus2Term> terms;

    bool depends_on_x2() const {
        if (degrees[1] != 0) return true;
        for (const auto& t : terms)
            if (t.k2 != 0 && (t.cos_coeff != 0.0 || t.sin_coeff != 0.0)) return true;
        return false;
    }

    double value(double x1, double x2) const {
        const double u1 = wrap01(x1), u2 = wrap01(x2);
        double v = constant + degrees[0] * x1 + degrees[1] * x2;
        for (const auto& t : terms) {
            const double th = kTwoPi * (t.k1 * u1 + t.k2 * u2);
            v += t.cos_coeff * std::cos(th) + t.sin_coeff * std::sin(th);
        }
        return v;
    }

    double d1(double x1, double x2) const {
        const double u1 = wrap01(x1), u2 = wrap01(x2);
        double v = degrees[0];
        for (const auto& t : terms) {
            if (t.k1 == 0) continue;
            const double th = kTwoPi * (t.k1 * u1 + t.k2 * u2);
            v += kTwoPi * t.k1 * (-t.cos_coeff * std::sin(th) + t.sin_coeff * std::cos(th));
        }
        return v;
    }

    double d2(double x1, double x2) const {
        const double u1 = wrap01(x1), u2 = wrap01(x2);
        double v = degrees[1];
        for (const auto& t : terms) {
            if (t.k2 == 0) continue;
            const double th = kTwoPi * (t.k1 * u1 + t.k2 * u2);
            v += kTwoPi * t.k2 * (-t.cos_coeff * std::sin(th) + t.sin_coeff * std::cos(th));
        }
        return v;
    }

    // value and gradient in one pass; the cocycle loops live here.
    void eval_all(double x1, double x2, double& val, double& g1, double& g2) const {
        const double u1 = wrap01(x1), u2 = wrap01(x2);
        val = constant + degrees[0] * x1 + degrees[1] * x2;
        g1 = degrees[0];
        g2 = degrees[1];
        for (const auto& t : terms) {
            const double th = kTwoPi * (t.k1 * u1 + t.k2 * u2);
            const double c = std::cos(th);
            const double s = std::sin(th);
            val += t.cos_coeff * c + t.sin_coeff * s;
            const double dtheta = -t.cos_coeff * s + t.sin_coeff * c;
            g1 += kTwoPi * t.k1 * dtheta;
            g2 += kTwoPi * t.k2 * dtheta;
        }
    }
};

}  // namespace torogrow
