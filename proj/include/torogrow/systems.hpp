#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "torogrow/circle_function.hpp"
#include "torogrow/errors.hpp"
#include "torogrow/geometry.hpp"
#include "torogrow/integer_matrix.hpp"
#include "torogrow/torus.hpp"

namespace torogrow {

// T_{alpha,phi}(x1, x2) = (x1 + alpha, x2 + phi(x1))
struct AnzaiSpec {
    double alpha = 0.0;
    CircleFunction phi;
};

// T_{alpha,phi,eps}(x1, x2) = (x1 + alpha, eps x2 + phi(x1)), eps = +-1
struct SkewFlipSpec {
    double alpha = 0.0;
    int epsilon = 1;
    CircleFunction phi;
};

// (x1, x2, x3) -> (x1 + alpha, flip x2 + beta(x1), x3 + gamma(x1, x2))
struct TwoStepSpec {
    double alpha = 0.0;
    CircleFunction beta;
    Torus2Function gamma;
    int flip = 1;
};

struct AutomorphismSpec {
    IMat3 n;
};

using SystemSpec = std::variant<AnzaiSpec, SkewFlipSpec, TwoStepSpec, AutomorphismSpec>;

inline void validate_spec(const SystemSpec& spec) {
    if (const auto* s = std::get_if<SkewFlipSpec>(&spec)) {
        if (s->epsilon != 1 && s->epsilon != -1)
            throw InputError("SkewFlipSpec: epsilon must be +1 or -1");
    } else if (const auto* t = std::get_if<TwoStepSpec>(&spec)) {
        if (t->flip != 1 && t->flip != -1) throw InputError("TwoStepSpec: flip must be +1 or -1");
    } else if (const auto* a = std::get_if<AutomorphismSpec>(&spec)) {
        if (!a->n.is_unimodular())
            throw InputError("AutomorphismSpec: linear part must have determinant +-1");
    }
}

inline std::size_t dimension(const SystemSpec& spec) {
    return std::visit(
        [](const auto& s) -> std::size_t {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, AnzaiSpec> || std::is_same_v<T, SkewFlipSpec>)
                return 2;
            else
                return 3;
        },
        spec);
}

namespace detail {

// One forward application, keeping every coordinate wrapped to [0, 1).
// Wrapping each step is exactly equivalent modulo Z^d and avoids the
// precision loss of polynomially growing lifts (for a two-step product the
// raw fiber lifts grow like n^2 and n^3).
inline void step_reduced(const SystemSpec& spec, std::array<double, 3>& x) {
    std::visit(
        [&x](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, AnzaiSpec>) {
                x[1] = wrap01(x[1] + s.phi.value(x[0]));
                x[0] = wrap01(x[0] + s.alpha);
            } else if constexpr (std::is_same_v<T, SkewFlipSpec>) {
                x[1] = wrap01(s.epsilon * x[1] + s.phi.value(x[0]));
                x[0] = wrap01(x[0] + s.alpha);
            } else if constexpr (std::is_same_v<T, TwoStepSpec>) {
                x[2] = wrap01(x[2] + s.gamma.value(x[0], x[1]));
                x[1] = wrap01(s.flip * x[1] + s.beta.value(x[0]));
                x[0] = wrap01(x[0] + s.alpha);
            } else {
                const auto& n = s.n.m;
                const std::array<double, 3> y = x;
                for (int i = 0; i < 3; ++i)
                    x[i] = wrap01(n[i][0] * y[0] + n[i][1] * y[1] + n[i][2] * y[2]);
            }
        },
        spec);
}

inline void step_reduced_back(const SystemSpec& spec, std::array<double, 3>& x) {
    std::visit(
        [&x](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, AnzaiSpec>) {
                x[0] = wrap01(x[0] - s.alpha);
                x[1] = wrap01(x[1] - s.phi.value(x[0]));
            } else if constexpr (std::is_same_v<T, SkewFlipSpec>) {
                x[0] = wrap01(x[0] - s.alpha);
                x[1] = wrap01(s.epsilon * (x[1] - s.phi.value(x[0])));
            } else if constexpr (std::is_same_v<T, TwoStepSpec>) {
                x[0] = wrap01(x[0] - s.alpha);
                x[1] = wrap01(s.flip * (x[1] - s.beta.value(x[0])));
                x[2] = wrap01(x[2] - s.gamma.value(x[0], x[1]));
            } else {
                const IMat3 inv = s.n.inverse();
                const std::array<double, 3> y = x;
                for (int i = 0; i < 3; ++i)
                    x[i] = wrap01(inv.m[i][0] * y[0] + inv.m[i][1] * y[1] + inv.m[i][2] * y[2]);
            }
        },
        spec);
}

}  // namespace detail

inline TorusPoint eval(const SystemSpec& spec, const TorusPoint& x) {
    validate_spec(spec);
    if (x.dim != dimension(spec)) throw InputError("eval: dimension mismatch");
    std::array<double, 3> lift = x.x;
    detail::step_reduced(spec, lift);
    TorusPoint out;
    out.dim = x.dim;
    for (std::size_t i = 0; i < x.dim; ++i) out.x[i] = wrap01(lift[i]);
    return out;
}

inline MatN jacobian(const SystemSpec& spec, const TorusPoint& x) {
    validate_spec(spec);
    if (x.dim != dimension(spec)) throw InputError("jacobian: dimension mismatch");
    return std::visit(
        [&x](const auto& s) -> MatN {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, AnzaiSpec>) {
                MatN j(2);
                j(0, 0) = 1.0;
                j(1, 0) = s.phi.derivative(x[0]);
                j(1, 1) = 1.0;
                return j;
            } else if constexpr (std::is_same_v<T, SkewFlipSpec>) {
                MatN j(2);
                j(0, 0) = 1.0;
                j(1, 0) = s.phi.derivative(x[0]);
                j(1, 1) = s.epsilon;
                return j;
            } else if constexpr (std::is_same_v<T, TwoStepSpec>) {
                MatN j(3);
                j(0, 0) = 1.0;
                j(1, 0) = s.beta.derivative(x[0]);
                j(1, 1) = s.flip;
                j(2, 0) = s.gamma.d1(x[0], x[1]);
                j(2, 1) = s.gamma.d2(x[0], x[1]);
                j(2, 2) = 1.0;
                return j;
            } else {
                MatN j(3);
                for (int i = 0; i < 3; ++i)
                    for (int c = 0; c < 3; ++c) j(i, c) = static_cast<double>(s.n.m[i][c]);
                return j;
            }
        },
        spec);
}

// n-fold composition via the running fiber sums (each step adds the fiber
// function once, so this is the displayed closed form evaluated
// incrementally, not a recomposition of reduced evaluations of f^n).
inline TorusPoint iterate(const SystemSpec& spec, const TorusPoint& x, long long n) {
    validate_spec(spec);
    if (x.dim != dimension(spec)) throw InputError("iterate: dimension mismatch");
    std::array<double, 3> lift = x.x;
    if (n >= 0)
        for (long long k = 0; k < n; ++k) detail::step_reduced(spec, lift);
    else
        for (long long k = 0; k < -n; ++k) detail::step_reduced_back(spec, lift);
    TorusPoint out;
    out.dim = x.dim;
    for (std::size_t i = 0; i < x.dim; ++i) out.x[i] = wrap01(lift[i]);
    return out;
}

// Birkhoff sum of f over the first orbit coordinate; compensated summation.
inline double birkhoff_sum(const CircleFunction& f, const SystemSpec& spec, const TorusPoint& x,
                           long long n) {
    validate_spec(spec);
    if (n < 0) throw InputError("birkhoff_sum: n must be nonnegative");
    if (x.dim != dimension(spec)) throw InputError("birkhoff_sum: dimension mismatch");
    std::array<double, 3> lift = x.x;
    CompensatedSum acc;
    for (long long k = 0; k < n; ++k) {
        acc.add(f.value(lift[0]));
        detail::step_reduced(spec, lift);
    }
    return acc.value();
}

inline double birkhoff_sum(const Torus2Function& f, const SystemSpec& spec, const TorusPoint& x,
                           long long n) {
    validate_spec(spec);
    if (n < 0) throw InputError("birkhoff_sum: n must be nonnegative");
    if (x.dim != dimension(spec)) throw InputError("birkhoff_sum: dimension mismatch");
    std::array<double, 3> lift = x.x;
    CompensatedSum acc;
    for (long long k = 0; k < n; ++k) {
        acc.add(f.value(lift[0], lift[1]));
        detail::step_reduced(spec, lift);
    }
    return acc.value();
}

// ---------------------------------------------------------------------------
// Random Anzai skew product over a circle rotation base:
//   f_omega(x1, x2) = (x1 + alpha(omega), x2 + phi(omega, x1)),
// driven by omega -> omega + base_theta.  phi is a trigonometric polynomial
// in x whose coefficients are circle functions of omega.
// ---------------------------------------------------------------------------

struct RandomAnzaiSpec {
    double base_theta = 0.0;
    CircleFunction alpha;   // alpha(omega)
    int x_degree = 0;       // degree of phi_omega in x
    CircleFunction offset;  // x-independent additive part, as a function of omega
    std::vector<CircleFunction> cos_k;  // coefficient of cos(2*pi*k*x), k = index+1
    std::vector<CircleFunction> sin_k;

    double phi_value(double omega, double x) const {
        double v = offset.value(omega) + static_cast<double>(x_degree) * x;
        const double u = wrap01(x);
        for (std::size_t k = 0; k < cos_k.size(); ++k)
            v += cos_k[k].value(omega) * std::cos(kTwoPi * (k + 1) * u);
        for (std::size_t k = 0; k < sin_k.size(); ++k)
            v += sin_k[k].value(omega) * std::sin(kTwoPi * (k + 1) * u);
        return v;
    }

    double phi_deriv(double omega, double x) const {
        double v = static_cast<double>(x_degree);
        const double u = wrap01(x);
        for (std::size_t k = 0; k < cos_k.size(); ++k)
            v -= kTwoPi * (k + 1) * cos_k[k].value(omega) * std::sin(kTwoPi * (k + 1) * u);
        for (std::size_t k = 0; k < sin_k.size(); ++k)
            v += kTwoPi * (k + 1) * sin_k[k].value(omega) * std::cos(kTwoPi * (k + 1) * u);
        return v;
    }
};

struct RandomState {
    double omega = 0.0;
    double x1 = 0.0;
    double x2 = 0.0;
};

// One step of the skew product T_f(omega, x) = (T omega, f_omega x).
inline RandomState random_step(const RandomAnzaiSpec& spec, const RandomState& s) {
    RandomState t;
    t.omega = wrap01(s.omega + spec.base_theta);
    t.x1 = wrap01(s.x1 + spec.alpha.value(s.omega));
    t.x2 = wrap01(s.x2 + spec.phi_value(s.omega, s.x1));
    return t;
}

// ---------------------------------------------------------------------------
// Special flow data: rotation by a under the roof b(x) = 1 + periodic part,
// plus the transverse skew product T_{alpha,beta}.
// ---------------------------------------------------------------------------

struct SpecialFlowSpec {
    double a = 0.0;
    CircleFunction roof_periodic;  // roof(x) = 1 + roof_periodic(x), strictly positive
    double alpha = 0.0;
    CircleFunction beta;
    double roof_min = 1.0;
    double roof_max = 1.0;

    double roof(double x) const { return 1.0 + roof_periodic.value(x); }
    double roof_deriv(double x) const { return roof_periodic.derivative(x); }
};

inline SpecialFlowSpec make_special_flow(double a, CircleFunction roof_periodic, double alpha,
                                         CircleFunction beta, int scan_points = 4096) {
    if (roof_periodic.degree != 0)
        throw InputError("make_special_flow: roof periodic part must have degree 0");
    if (std::abs(roof_periodic.constant) > 1e-12)
        throw InputError("make_special_flow: roof must have mean 1 (no constant offset)");
    if (beta.degree != 0) throw InputError("make_special_flow: beta must have degree 0");
    SpecialFlowSpec s;
    s.a = a;
    s.roof_periodic = std::move(roof_periodic);
    s.alpha = alpha;
    s.beta = std::move(beta);
    s.roof_min = s.roof_max = s.roof(0.0);
    for (int i = 1; i < scan_points; ++i) {
        const double v = s.roof(static_cast<double>(i) / scan_points);
        s.roof_min = std::min(s.roof_min, v);
        s.roof_max = std::max(s.roof_max, v);
    }
    if (s.roof_min <= 0.0) throw InputError("make_special_flow: roof is not strictly positive");
    return s;
}

// Birkhoff sum b^{(n)} of the roof over the rotation by a, with the cocycle
// convention b^{(0)} = 0 and b^{(-n)}(x) = -b^{(n)}(x - n a).
inline double roof_birkhoff(const SpecialFlowSpec& s, double x1, long long n) {
    CompensatedSum acc;
    if (n >= 0)
        for (long long j = 0; j < n; ++j) acc.add(s.roof(x1 + j * s.a));
    else
        for (long long j = 1; j <= -n; ++j) acc.add(-s.roof(x1 - j * s.a));
    return acc.value();
}

inline double roof_deriv_birkhoff(const SpecialFlowSpec& s, double x1, long long n) {
    CompensatedSum acc;
    if (n >= 0)
        for (long long j = 0; j < n; ++j) acc.add(s.roof_deriv(x1 + j * s.a));
    else
        for (long long j = 1; j <= -n; ++j) acc.add(-s.roof_deriv(x1 - j * s.a));
    return acc.value();
}

// The unique n with b^{(n)}(x1) <= x2 < b^{(n+1)}(x1); counts roof crossings
// of the point (x1, x2) in the special-flow picture.
inline long long return_index(const SpecialFlowSpec& s, double x1, double x2) {
    if (!std::isfinite(x2)) throw InputError("return_index: non-finite height");
    long long n = 0;
    double sum = 0.0;  // b^{(n)}(x1)
    if (x2 >= 0.0) {
        for (;;) {
            const double next = sum + s.roof(x1 + n * s.a);  // b^{(n+1)}
            if (x2 < next) return n;
            sum = next;
            ++n;
        }
    }
    for (;;) {
        --n;
        sum -= s.roof(x1 + n * s.a);  // b^{(n)}
        if (sum <= x2) return n;
    }
}

}  // namespace torogrow
