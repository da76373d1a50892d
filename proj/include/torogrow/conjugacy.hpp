#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "torogrow/circle_function.hpp"
#include "torogrow/errors.hpp"
#include "torogrow/geometry.hpp"
#include "torogrow/lattice.hpp"
#include "torogrow/systems.hpp"
#include "torogrow/torus.hpp"

namespace torogrow {

// ---------------------------------------------------------------------------
// Area-preserving maps of T^2 given as lifts R^2 -> R^2, composable in chains
// so conjugates with a known straightening can be built as fixtures.
// ---------------------------------------------------------------------------

using ILin2 = std::array<std::array<long long, 2>, 2>;

class TorusMap2 {
public:
    virtual ~TorusMap2() = default;
    virtual Vec2 eval_lift(const Vec2& x) const = 0;
    virtual Mat2 jacobian(const Vec2& x) const = 0;
    virtual ILin2 linear_part() const = 0;
    virtual double det_sign() const = 0;  // constant Jacobian determinant, +-1
};

class SkewProductMap final : public TorusMap2 {
public:
    explicit SkewProductMap(SkewFlipSpec spec) : spec_(std::move(spec)) {
        if (spec_.epsilon != 1 && spec_.epsilon != -1)
            throw InputError("SkewProductMap: epsilon must be +-1");
    }

    Vec2 eval_lift(const Vec2& x) const override {
        return {x[0] + spec_.alpha, spec_.epsilon * x[1] + spec_.phi.value(x[0])};
    }
    Mat2 jacobian(const Vec2& x) const override {
        Mat2 j;
        j(0, 0) = 1.0;
        j(1, 0) = spec_.phi.derivative(x[0]);
        j(1, 1) = spec_.epsilon;
        return j;
    }
    ILin2 linear_part() const override {
        return {{{1, 0}, {spec_.phi.degree, spec_.epsilon}}};
    }
    double det_sign() const override { return spec_.epsilon; }

private:
    SkewFlipSpec spec_;
};

class LinearTorusMap final : public TorusMap2 {
public:
    explicit LinearTorusMap(const ILin2& m) : m_(m) {
        const long long d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if (d != 1 && d != -1) throw InputError("LinearTorusMap: matrix must have determinant +-1");
        det_ = static_cast<double>(d);
    }

    Vec2 eval_lift(const Vec2& x) const override {
        return {m_[0][0] * x[0] + m_[0][1] * x[1], m_[1][0] * x[0] + m_[1][1] * x[1]};
    }
    Mat2 jacobian(const Vec2&) const override {
        Mat2 j;
        j(0, 0) = static_cast<double>(m_[0][0]);
        j(0, 1) = static_cast<double>(m_[0][1]);
        j(1, 0) = static_cast<double>(m_[1][0]);
        j(1, 1) = static_cast<double>(m_[1][1]);
        return j;
    }
    ILin2 linear_part() const override { return m_; }
    double det_sign() const override { return det_; }

private:
    ILin2 m_;
    double det_;
};

// (x1 + g(x2), x2) for axis 0, (x1, x2 + g(x1)) for axis 1; always area
// preserving.
class ShearMap final : public TorusMap2 {
public:
    ShearMap(int axis, CircleFunction g) : axis_(axis), g_(std::move(g)) {
        if (axis_ != 0 && axis_ != 1) throw InputError("ShearMap: axis must be 0 or 1");
    }

    Vec2 eval_lift(const Vec2& x) const override {
        if (axis_ == 0) return {x[0] + g_.value(x[1]), x[1]};
        return {x[0], x[1] + g_.value(x[0])};
    }
    Mat2 jacobian(const Vec2& x) const override {
        Mat2 j = Mat2::identity();
        if (axis_ == 0)
            j(0, 1) = g_.derivative(x[1]);
        else
            j(1, 0) = g_.derivative(x[0]);
        return j;
    }
    ILin2 linear_part() const override {
        if (axis_ == 0) return {{{1, g_.degree}, {0, 1}}};
        return {{{1, 0}, {g_.degree, 1}}};
    }
    double det_sign() const override { return 1.0; }

private:
    int axis_;
    CircleFunction g_;
};

// Composition; maps are applied in list order (front first).
class ChainMap2 final : public TorusMap2 {
public:
    explicit ChainMap2(std::vector<std::shared_ptr<const TorusMap2>> maps) : maps_(std::move(maps)) {
        if (maps_.empty()) throw InputError("ChainMap2: empty chain");
    }

    Vec2 eval_lift(const Vec2& x) const override {
        Vec2 y = x;
        for (const auto& m : maps_) y = m->eval_lift(y);
        return y;
    }
    Mat2 jacobian(const Vec2& x) const override {
        Vec2 y = x;
        Mat2 j = Mat2::identity();
        for (const auto& m : maps_) {
            j = m->jacobian(y) * j;
            y = m->eval_lift(y);
        }
        return j;
    }
    ILin2 linear_part() const override {
        ILin2 l{{{1, 0}, {0, 1}}};
        for (const auto& m : maps_) {
            const ILin2 a = m->linear_part();
            const ILin2 prev = l;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    l[i][j] = a[i][0] * prev[0][j] + a[i][1] * prev[1][j];
        }
        return l;
    }
    double det_sign() const override {
        double d = 1.0;
        for (const auto& m : maps_) d *= m->det_sign();
        return d;
    }

private:
    std::vector<std::shared_ptr<const TorusMap2>> maps_;
};

inline std::shared_ptr<const TorusMap2> map_from_spec(const SystemSpec& spec) {
    if (const auto* a = std::get_if<AnzaiSpec>(&spec))
        return std::make_shared<SkewProductMap>(SkewFlipSpec{a->alpha, 1, a->phi});
    if (const auto* s = std::get_if<SkewFlipSpec>(&spec))
        return std::make_shared<SkewProductMap>(*s);
    throw InputError("map_from_spec: only two-dimensional systems define torus maps of T^2");
}

// ---------------------------------------------------------------------------
// First integral xi(x) = p1 x1 + p2 x2 + periodic(x), normalized so that
// xi(0,0) = 0, with a verified gradient-norm floor.
// ---------------------------------------------------------------------------

struct FirstIntegral {
    std::array<long long, 2> p{1, 0};
    Torus2Function periodic;  // degrees must be (0, 0)
    double offset = 0.0;
    double min_grad_norm = 0.0;

    double value(const Vec2& x) const {
        return static_cast<double>(p[0]) * x[0] + static_cast<double>(p[1]) * x[1] +
               periodic.value(x[0], x[1]) - offset;
    }

    Vec2 grad(const Vec2& x) const {
        return {static_cast<double>(p[0]) + periodic.d1(x[0], x[1]),
                static_cast<double>(p[1]) + periodic.d2(x[0], x[1])};
    }
};

inline FirstIntegral make_first_integral(std::array<long long, 2> p, Torus2Function periodic,
                                         std::size_t verification_grid = 256) {
    if (p[0] == 0 && p[1] == 0) throw InputError("make_first_integral: degree vector is zero");
    if (gcd_ll(p[0], p[1]) != 1)
        throw InputError("make_first_integral: degrees must be relatively prime");
    if (periodic.degrees[0] != 0 || periodic.degrees[1] != 0)
        throw InputError("make_first_integral: periodic part must have degrees (0, 0)");
    FirstIntegral xi;
    xi.p = p;
    xi.periodic = std::move(periodic);
    xi.offset = xi.periodic.value(0.0, 0.0);
    double min_g = 1e300;
    for (std::size_t i = 0; i < verification_grid; ++i)
        for (std::size_t j = 0; j < verification_grid; ++j) {
            const Vec2 x{static_cast<double>(i) / verification_grid,
                         static_cast<double>(j) / verification_grid};
            min_g = std::min(min_g, norm(xi.grad(x)));
        }
    xi.min_grad_norm = min_g;
    if (min_g < 1e-9)
        throw StructuralError("make_first_integral: gradient norm floor violated (min " +
                              std::to_string(min_g) + ")");
    return xi;
}

// ---------------------------------------------------------------------------
// Dense fixed-step RK4 curves with cubic Hermite evaluation
// ---------------------------------------------------------------------------

namespace detail {

struct DenseCurve {
    double step = 0.0;
    std::vector<Vec2> pos;
    std::vector<Vec2> vel;

    double t_max() const { return step * (pos.size() - 1); }

    Vec2 eval(double t) const {
        const double u = t / step;
        auto i = static_cast<long long>(std::floor(u));
        if (i < 0) i = 0;
        if (i >= static_cast<long long>(pos.size()) - 1) i = static_cast<long long>(pos.size()) - 2;
        const double s = u - i;
        const Vec2 &p0 = pos[i], &p1 = pos[i + 1];
        const Vec2 v0 = step * vel[i], v1 = step * vel[i + 1];
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
        const double h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s);
        const double h11 = s * s * (s - 1);
        return {h00 * p0[0] + h10 * v0[0] + h01 * p1[0] + h11 * v1[0],
                h00 * p0[1] + h10 * v0[1] + h01 * p1[1] + h11 * v1[1]};
    }
};

template <typename Field>
inline Vec2 rk4_step(const Field& f, const Vec2& x, double h) {
    const Vec2 k1 = f(x);
    const Vec2 k2 = f(Vec2{x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]});
    const Vec2 k3 = f(Vec2{x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]});
    const Vec2 k4 = f(Vec2{x[0] + h * k3[0], x[1] + h * k3[1]});
    return {x[0] + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            x[1] + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
}

template <typename Field>
inline DenseCurve integrate_dense(const Field& f, const Vec2& start, double t_end, double h) {
    DenseCurve c;
    const auto n = static_cast<std::size_t>(std::ceil(t_end / h - 1e-12));
    c.step = t_end / static_cast<double>(n);
    c.pos.reserve(n + 1);
    c.vel.reserve(n + 1);
    Vec2 x = start;
    c.pos.push_back(x);
    c.vel.push_back(f(x));
    for (std::size_t i = 0; i < n; ++i) {
        x = rk4_step(f, x, c.step);
        c.pos.push_back(x);
        c.vel.push_back(f(x));
    }
    return c;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Transversal curve: gradient-flow parametrization d gamma/ds =
// grad xi / |grad xi|^2 (plus an optional tangential drift lambda J grad xi /
// |grad xi|^2, which leaves xi(gamma(s)) = s untouched).
// ---------------------------------------------------------------------------

namespace detail {

inline auto transversal_field(const FirstIntegral& xi, double lambda) {
    return [&xi, lambda](const Vec2& x) -> Vec2 {
        const Vec2 g = xi.grad(x);
        const double n2 = g[0] * g[0] + g[1] * g[1];
        return {(g[0] - lambda * g[1]) / n2, (g[1] + lambda * g[0]) / n2};
    };
}

}  // namespace detail

inline std::vector<Vec2> transversal_curve(const FirstIntegral& xi, std::span<const double> s_values,
                                           double ode_step = 1e-3, double lambda = 0.0) {
    for (std::size_t i = 0; i + 1 < s_values.size(); ++i)
        if (s_values[i + 1] < s_values[i])
            throw InputError("transversal_curve: s values must be ascending");
    if (!s_values.empty() && s_values.front() < 0.0)
        throw InputError("transversal_curve: s values must be nonnegative");
    const auto field = detail::transversal_field(xi, lambda);

    std::vector<Vec2> out;
    out.reserve(s_values.size());
    Vec2 x{0.0, 0.0};
    double s = 0.0;
    std::size_t next = 0;
    while (next < s_values.size() && s_values[next] <= s) out.push_back(x), ++next;
    while (next < s_values.size()) {
        const double target = std::min(s + ode_step, s_values[next]);
        const double h = target - s;
        if (norm(xi.grad(x)) < 0.5 * xi.min_grad_norm)
            throw StructuralError("transversal_curve: gradient norm floor violated along the path");
        x = detail::rk4_step(field, x, h);
        s = target;
        while (next < s_values.size() && s_values[next] <= s + 1e-15) out.push_back(x), ++next;
    }
    return out;
}

// ---------------------------------------------------------------------------
// build_conjugacy: straighten f into T_{alpha,phi,eps} via level-set ODE
// integration (fiber field (-xi_{x2}, xi_{x1})).
// ---------------------------------------------------------------------------

struct ConjugacyConfig {
    std::size_t grid_s = 64;
    std::size_t grid_t = 64;
    double ode_step = 1e-3;
    double hypothesis_tol = 1e-8;
    double tau_tol = 1e-6;          // allowed spread of the return time over s
    double event_tol = 1e-6;        // distance gate for return-event acceptance
    double shoot_tol = 1e-11;       // endpoint gate for the equivariant transversal
    std::size_t fit_harmonics = 16;
    std::size_t hypothesis_grid = 16;
};

struct ConjugacyResult {
    std::array<long long, 2> p{};
    std::array<long long, 2> q{};  // psi(s+1, t) = psi(s, t) + q
    std::array<long long, 2> v{};  // psi(s, t+1) = psi(s, t) + v
    int epsilon = 1;
    double tau_period = 0.0;  // measured raw return time (1 in exact arithmetic)
    double tau_spread = 0.0;
    double lambda = 0.0;      // tangential drift used by the equivariant transversal
    double alpha = 0.0;
    std::size_t grid_s = 0;
    std::size_t grid_t = 0;
    std::vector<Vec2> psi;    // lift values, index j * grid_t + k for (s_j, t_k)
    CircleFunction phi;
    double residual_sup = 0.0;
    double xi_residual = 0.0;

    const Vec2& psi_at(std::size_t j, std::size_t k) const { return psi[j * grid_t + k]; }

    // Lattice value with equivariant wrap-around in both directions.
    Vec2 psi_wrapped(long long j, long long k) const {
        const auto ns = static_cast<long long>(grid_s);
        const auto nt = static_cast<long long>(grid_t);
        long long js = j, ks = k, mq = 0, mv = 0;
        while (js < 0) js += ns, --mq;
        while (js >= ns) js -= ns, ++mq;
        while (ks < 0) ks += nt, --mv;
        while (ks >= nt) ks -= nt, ++mv;
        Vec2 r = psi_at(static_cast<std::size_t>(js), static_cast<std::size_t>(ks));
        r[0] += mq * static_cast<double>(q[0]) + mv * static_cast<double>(v[0]);
        r[1] += mq * static_cast<double>(q[1]) + mv * static_cast<double>(v[1]);
        return r;
    }

    // Catmull-Rom interpolation of the stored lattice (s, theta in [0,1) units).
    Vec2 psi_interp(double s, double theta) const {
        auto cr = [](double pm1, double p0, double p1, double p2, double u) {
            return 0.5 * ((2.0 * p0) + (-pm1 + p1) * u + (2.0 * pm1 - 5.0 * p0 + 4.0 * p1 - p2) * u * u +
                          (-pm1 + 3.0 * p0 - 3.0 * p1 + p2) * u * u * u);
        };
        const double fs = s * grid_s;
        const double ft = theta * grid_t;
        const auto j0 = static_cast<long long>(std::floor(fs));
        const auto k0 = static_cast<long long>(std::floor(ft));
        const double us = fs - j0;
        const double ut = ft - k0;
        Vec2 rows[4];
        for (int dj = -1; dj <= 2; ++dj) {
            Vec2 cols[4];
            for (int dk = -1; dk <= 2; ++dk) cols[dk + 1] = psi_wrapped(j0 + dj, k0 + dk);
            rows[dj + 1] = {cr(cols[0][0], cols[1][0], cols[2][0], cols[3][0], ut),
                            cr(cols[0][1], cols[1][1], cols[2][1], cols[3][1], ut)};
        }
        return {cr(rows[0][0], rows[1][0], rows[2][0], rows[3][0], us),
                cr(rows[0][1], rows[1][1], rows[2][1], rows[3][1], us)};
    }
};

namespace detail {

struct FiberData {
    DenseCurve curve;
    double tau = 0.0;  // first forward return time to start + v
};

// Integrates the fiber through `start` until the first return to
// start + v_expected (v_expected = (-p2, p1)); returns the dense curve
// trimmed a little past the return.
inline FiberData integrate_fiber(const FirstIntegral& xi, const Vec2& start, double h,
                                 const std::array<long long, 2>& v_expected, double event_tol) {
    auto field = [&xi](const Vec2& x) -> Vec2 {
        const Vec2 g = xi.grad(x);
        return {-g[1], g[0]};
    };
    const Vec2 vplus{start[0] + static_cast<double>(v_expected[0]),
                     start[1] + static_cast<double>(v_expected[1])};
    const Vec2 vminus{start[0] - static_cast<double>(v_expected[0]),
                      start[1] - static_cast<double>(v_expected[1])};

    FiberData fd;
    fd.curve.step = h;
    Vec2 x = start;
    fd.curve.pos.push_back(x);
    fd.curve.vel.push_back(field(x));
    const double speed_cap = 1.0 + norm(xi.grad(start));  // refreshed below
    double max_speed = speed_cap;
    const double t_max = 8.0;  // exact return time is 1; anything near t_max is structural
    const auto max_steps = static_cast<std::size_t>(std::ceil(t_max / h));

    auto near = [&](const Vec2& a, const Vec2& b, double r) {
        const double dx = a[0] - b[0], dy = a[1] - b[1];
        return dx * dx + dy * dy <= r * r;
    };

    std::size_t step_count = 0;
    for (; step_count < max_steps; ++step_count) {
        const Vec2 x_prev = x;
        x = rk4_step(field, x, h);
        fd.curve.pos.push_back(x);
        fd.curve.vel.push_back(field(x));
        max_speed = std::max(max_speed, norm(fd.curve.vel.back()));
        const double capture = 2.5 * h * max_speed;
        const double t_here = h * (step_count + 1);
        if (t_here < 4 * h) continue;  // skip the immediate neighbourhood of the start

        auto try_event = [&](const Vec2& z, const char* which) -> bool {
            if (!near(x, z, capture) && !near(x_prev, z, capture)) return false;
            // root of the tangential coordinate sigma(t) = (psi(t) - z) . T
            const Vec2 g = xi.grad(z);
            const Vec2 tdir{-g[1] / norm(g), g[0] / norm(g)};
            const double t_lo = t_here - h, t_hi = t_here;
            double a = t_lo, b = t_hi;
            auto sigma = [&](double t) {
                const Vec2 pnt = fd.curve.eval(t);
                return (pnt[0] - z[0]) * tdir[0] + (pnt[1] - z[1]) * tdir[1];
            };
            double fa = sigma(a), fb = sigma(b);
            if (fa * fb > 0.0) return false;
            for (int it = 0; it < 80 && (b - a) > 1e-15; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = sigma(mid);
                if (fa * fm <= 0.0) {
                    b = mid;
                    fb = fm;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            const double t_star = 0.5 * (a + b);
            const Vec2 hit = fd.curve.eval(t_star);
            const double miss = std::hypot(hit[0] - z[0], hit[1] - z[1]);
            if (miss > event_tol) return false;  // near pass of a different sheet
            if (which[0] == 's')
                throw StructuralError(
                    "integrate_fiber: level curve closed before reaching the displaced start");
            if (which[0] == 'm')
                throw StructuralError(
                    "integrate_fiber: fiber returned with reversed orientation (negative period)");
            fd.tau = t_star;
            return true;
        };

        if (try_event(vplus, "plus")) break;
        if (try_event(vminus, "minus")) break;   // throws
        if (try_event(start, "start")) break;    // throws
    }
    if (fd.tau == 0.0)
        throw StructuralError("integrate_fiber: no return detected (t_max exceeded)");
    return fd;
}

}  // namespace detail

inline ConjugacyResult build_conjugacy(const TorusMap2& f, const FirstIntegral& xi, double alpha,
                                       const ConjugacyConfig& cfg = {}) {
    // hypothesis: xi o f = xi + alpha and area preservation
    for (std::size_t i = 0; i < cfg.hypothesis_grid; ++i)
        for (std::size_t j = 0; j < cfg.hypothesis_grid; ++j) {
            const Vec2 x{(i + 0.25) / cfg.hypothesis_grid, (j + 0.25) / cfg.hypothesis_grid};
            const double raw = xi.value(f.eval_lift(x)) - xi.value(x) - alpha;
            if (std::abs(raw) > cfg.hypothesis_tol)
                throw HypothesisError("build_conjugacy: xi o f - xi - alpha = " + std::to_string(raw) +
                                      " exceeds tolerance (lift must satisfy the relation exactly, "
                                      "not modulo 1)");
            const double dj = det(f.jacobian(x));
            if (std::abs(std::abs(dj) - 1.0) > 1e-9)
                throw HypothesisError("build_conjugacy: map is not area-preserving (|det Df| = " +
                                      std::to_string(std::abs(dj)) + ")");
        }
    const int epsilon = f.det_sign() > 0 ? 1 : -1;

    ConjugacyResult res;
    res.p = {xi.p[0], xi.p[1]};
    res.alpha = alpha;
    res.epsilon = epsilon;
    res.grid_s = cfg.grid_s;
    res.grid_t = cfg.grid_t;
    res.v = {-xi.p[1], xi.p[0]};

    // --- equivariant transversal: shoot the tangential drift lambda so that
    // gamma(1) is an integer point of the level-1 curve ---
    const auto q0 = minimal_bezout(xi.p[0], xi.p[1]);
    auto endpoint = [&](double lambda) -> Vec2 {
        const auto field = detail::transversal_field(xi, lambda);
        const auto n = static_cast<std::size_t>(std::llround(1.0 / cfg.ode_step));
        const double h = 1.0 / static_cast<double>(n);
        Vec2 x{0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) {
            if (norm(xi.grad(x)) < 0.5 * xi.min_grad_norm)
                throw StructuralError("build_conjugacy: gradient norm floor violated along gamma");
            x = detail::rk4_step(field, x, h);
        }
        return x;
    };

    const Vec2 e0 = endpoint(0.0);
    // nearest integer point of A_1 among q0 + k (-p2, p1)
    std::array<long long, 2> q_target{};
    double best_d = 1e300;
    for (long long k = -16; k <= 16; ++k) {
        const std::array<long long, 2> cand{q0[0] - k * xi.p[1], q0[1] + k * xi.p[0]};
        const double d = std::hypot(e0[0] - cand[0], e0[1] - cand[1]);
        if (d < best_d) {
            best_d = d;
            q_target = cand;
        }
    }
    res.q = q_target;

    const Vec2 gq = xi.grad(Vec2{static_cast<double>(q_target[0]), static_cast<double>(q_target[1])});
    const Vec2 tq{-gq[1] / norm(gq), gq[0] / norm(gq)};
    auto gap = [&](double lambda) {
        const Vec2 e = endpoint(lambda);
        return (e[0] - q_target[0]) * tq[0] + (e[1] - q_target[1]) * tq[1];
    };

    double lambda = 0.0;
    double g0 = gap(0.0);
    if (std::abs(g0) > cfg.shoot_tol) {
        double lo = 0.0, hi = 0.0, flo = g0, fhi = g0;
        double span = 0.25;
        bool bracketed = false;
        for (int it = 0; it < 16 && !bracketed; ++it, span *= 2.0) {
            for (const double cand : {(g0 > 0.0) ? -span : span, (g0 > 0.0) ? span : -span}) {
                const double fc = gap(cand);
                if (fc * g0 <= 0.0) {
                    lo = std::min(0.0, cand);
                    hi = std::max(0.0, cand);
                    flo = (lo == 0.0) ? g0 : fc;
                    fhi = (hi == 0.0) ? g0 : fc;
                    bracketed = true;
                    break;
                }
            }
        }
        if (!bracketed)
            throw StructuralError("build_conjugacy: failed to bracket the equivariant transversal");
        for (int it = 0; it < 200 && (hi - lo) > 1e-14; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = gap(mid);
            if (flo * fm <= 0.0) {
                hi = mid;
                fhi = fm;
            } else {
                lo = mid;
                flo = fm;
            }
        }
        (void)fhi;
        lambda = 0.5 * (lo + hi);
    }
    res.lambda = lambda;
    {
        const Vec2 e = endpoint(lambda);
        const double miss = std::hypot(e[0] - q_target[0], e[1] - q_target[1]);
        if (miss > 1e-7)
            throw StructuralError("build_conjugacy: transversal endpoint misses the lattice point by " +
                                  std::to_string(miss));
    }

    const auto gamma_curve =
        detail::integrate_dense(detail::transversal_field(xi, lambda), Vec2{0.0, 0.0}, 1.0,
                                cfg.ode_step);
    auto gamma_at = [&](double s) -> Vec2 {
        // s in [0, 1]; callers handle wraps explicitly
        return gamma_curve.eval(s);
    };

    // --- fibers on the s-grid and on the alpha-shifted s-grid ---
    const std::size_t ns = cfg.grid_s, nt = cfg.grid_t;
    std::vector<double> s_main(ns), s_shift(ns);
    for (std::size_t j = 0; j < ns; ++j) {
        s_main[j] = static_cast<double>(j) / ns;
        s_shift[j] = wrap01(s_main[j] + alpha);
    }

    std::vector<detail::FiberData> fib_main(ns), fib_shift(ns);
    double tau_sum = 0.0;
    double tau_min = 1e300, tau_max = -1e300;
    auto integrate_at = [&](double s) {
        return detail::integrate_fiber(xi, gamma_at(s), cfg.ode_step, res.v, cfg.event_tol);
    };
    for (std::size_t j = 0; j < ns; ++j) {
        fib_main[j] = integrate_at(s_main[j]);
        fib_shift[j] = integrate_at(s_shift[j]);
        for (const double t : {fib_main[j].tau, fib_shift[j].tau}) {
            tau_sum += t;
            tau_min = std::min(tau_min, t);
            tau_max = std::max(tau_max, t);
        }
    }
    const double tau_bar = tau_sum / static_cast<double>(2 * ns);
    res.tau_period = tau_bar;
    res.tau_spread = tau_max - tau_min;
    if (res.tau_spread > cfg.tau_tol)
        throw StructuralError("build_conjugacy: return time varies across fibers (spread " +
                              std::to_string(res.tau_spread) + ")");

    // --- psi lattice (t rescaled by the measured return time) ---
    res.psi.resize(ns * nt);
    res.xi_residual = 0.0;
    for (std::size_t j = 0; j < ns; ++j)
        for (std::size_t k = 0; k < nt; ++k) {
            const Vec2 pnt = fib_main[j].curve.eval(static_cast<double>(k) / nt * tau_bar);
            res.psi[j * nt + k] = pnt;
            res.xi_residual = std::max(res.xi_residual, std::abs(xi.value(pnt) - s_main[j]));
        }

    // --- phi extraction: phi(s) is the fiber time of f(psi(s, 0)) on the
    // fiber over s + alpha ---
    const Vec2 qv{static_cast<double>(res.q[0]), static_cast<double>(res.q[1])};
    const Vec2 vv{static_cast<double>(res.v[0]), static_cast<double>(res.v[1])};
    auto locate_on_fiber = [&](const detail::FiberData& fd, double s_level, Vec2 z,
                               double tau) -> double {
        // bring z onto the stored level sheet
        const double level_gap = xi.value(z) - s_level;
        const auto e_shift = static_cast<long long>(std::llround(level_gap));
        z[0] -= e_shift * qv[0];
        z[1] -= e_shift * qv[1];
        if (std::abs(xi.value(z) - s_level) > 1e-6)
            throw StructuralError("build_conjugacy: image point does not lie on the expected level");
        // reduce along the fiber period
        const Vec2 start = fd.curve.pos.front();
        const double vv2 = vv[0] * vv[0] + vv[1] * vv[1];
        const double b_est = ((z[0] - start[0]) * vv[0] + (z[1] - start[1]) * vv[1]) / vv2;
        double best_t = -1.0, best_miss = 1e300;
        for (long long kv = static_cast<long long>(std::floor(b_est)) - 1;
             kv <= static_cast<long long>(std::floor(b_est)) + 1; ++kv) {
            const Vec2 zz{z[0] - kv * vv[0], z[1] - kv * vv[1]};
            // nearest node, then tangential root refinement around it
            std::size_t best_node = 0;
            double best_node_d = 1e300;
            for (std::size_t i = 0; i < fd.curve.pos.size(); ++i) {
                const double d = std::hypot(fd.curve.pos[i][0] - zz[0], fd.curve.pos[i][1] - zz[1]);
                if (d < best_node_d) {
                    best_node_d = d;
                    best_node = i;
                }
            }
            const double t_c = fd.curve.step * best_node;
            const Vec2 g = xi.grad(zz);
            const Vec2 tdir{-g[1] / norm(g), g[0] / norm(g)};
            auto sigma = [&](double t) {
                const Vec2 pnt = fd.curve.eval(t);
                return (pnt[0] - zz[0]) * tdir[0] + (pnt[1] - zz[1]) * tdir[1];
            };
            double a = std::max(0.0, t_c - 2 * fd.curve.step);
            double b = std::min(fd.curve.t_max(), t_c + 2 * fd.curve.step);
            double fa = sigma(a), fb = sigma(b);
            if (fa * fb > 0.0) continue;
            for (int it = 0; it < 80 && (b - a) > 1e-15; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = sigma(mid);
                if (fa * fm <= 0.0) {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            const double t_star = 0.5 * (a + b);
            const Vec2 hit = fd.curve.eval(t_star);
            const double miss = std::hypot(hit[0] - zz[0], hit[1] - zz[1]);
            if (miss < best_miss) {
                best_miss = miss;
                best_t = t_star + kv * tau;
            }
        }
        if (best_miss > cfg.event_tol)
            throw StructuralError("build_conjugacy: failed to locate image point on the target fiber");
        return best_t / tau;  // rescaled fiber coordinate
    };

    std::vector<double> phi_samples(ns);
    const double dtheta = 0.5 / static_cast<double>(nt);
    for (std::size_t j = 0; j < ns; ++j) {
        const double s_t = s_shift[j];
        const Vec2 z0 = f.eval_lift(fib_main[j].curve.pos.front());
        const double eta0 = locate_on_fiber(fib_shift[j], s_t, z0, tau_bar);
        const Vec2 z1 = f.eval_lift(fib_main[j].curve.eval(dtheta * tau_bar));
        double eta1 = locate_on_fiber(fib_shift[j], s_t, z1, tau_bar);
        double d = eta1 - eta0;
        if (d > 0.5) d -= 1.0;
        if (d < -0.5) d += 1.0;
        const double eps_est = d / dtheta;
        if (std::abs(eps_est - epsilon) > 0.1)
            throw StructuralError("build_conjugacy: fiber orientation disagrees with det Df (" +
                                  std::to_string(eps_est) + " vs " + std::to_string(epsilon) + ")");
        phi_samples[j] = eta0;
    }

    // unwrap phi into a continuous lift and fit degree + trigonometric part
    std::vector<double> lift(ns);
    lift[0] = phi_samples[0];
    for (std::size_t j = 1; j < ns; ++j) {
        double vphi = phi_samples[j];
        while (vphi - lift[j - 1] > 0.5) vphi -= 1.0;
        while (vphi - lift[j - 1] < -0.5) vphi += 1.0;
        lift[j] = vphi;
    }
    // closing sample at s = 1 via equivariance: f(psi(1,0)) = f(psi(0,0) + q)
    double closing;
    {
        const auto lp = f.linear_part();
        Vec2 z = f.eval_lift(fib_main[0].curve.pos.front());
        z[0] += lp[0][0] * qv[0] + lp[0][1] * qv[1];
        z[1] += lp[1][0] * qv[0] + lp[1][1] * qv[1];
        // target fiber is over frac(1 + alpha) = s_shift[0]
        closing = locate_on_fiber(fib_shift[0], s_shift[0], z, tau_bar);
        while (closing - lift[ns - 1] > 0.5) closing -= 1.0;
        while (closing - lift[ns - 1] < -0.5) closing += 1.0;
    }
    const auto phi_degree = static_cast<int>(std::llround(closing - lift[0]));

    CircleFunction phi;
    phi.degree = phi_degree;
    {
        const std::size_t m = std::min(cfg.fit_harmonics, (ns - 1) / 2);
        phi.cos_coeffs.assign(m, 0.0);
        phi.sin_coeffs.assign(m, 0.0);
        double mean = 0.0;
        std::vector<double> tilde(ns);
        for (std::size_t j = 0; j < ns; ++j) {
            tilde[j] = lift[j] - phi_degree * s_main[j];
            mean += tilde[j];
        }
        mean /= static_cast<double>(ns);
        phi.constant = mean;
        for (std::size_t k = 1; k <= m; ++k) {
            double ac = 0.0, as = 0.0;
            for (std::size_t j = 0; j < ns; ++j) {
                const double th = kTwoPi * static_cast<double>(k) * s_main[j];
                ac += (tilde[j] - mean) * std::cos(th);
                as += (tilde[j] - mean) * std::sin(th);
            }
            phi.cos_coeffs[k - 1] = 2.0 * ac / static_cast<double>(ns);
            phi.sin_coeffs[k - 1] = 2.0 * as / static_cast<double>(ns);
        }
    }
    res.phi = phi;

    // --- residual over the lattice: f(psi(s,t)) vs psi(s+alpha, eps t + phi(s)) ---
    auto psi_eval = [&](double s_plus_alpha, double theta, std::size_t j_shift) -> Vec2 {
        // s_plus_alpha = s_main[j_shift] + alpha; stored fiber sits at its
        // fractional part, one q short when the sum wrapped
        const double s_frac = s_shift[j_shift];
        const double wrap_q = std::floor(s_plus_alpha - s_frac + 0.5);
        const double kv = std::floor(theta);
        const double t_loc = (theta - kv) * tau_bar;
        Vec2 pnt = fib_shift[j_shift].curve.eval(t_loc);
        pnt[0] += wrap_q * qv[0] + kv * vv[0];
        pnt[1] += wrap_q * qv[1] + kv * vv[1];
        return pnt;
    };
    res.residual_sup = 0.0;
    for (std::size_t j = 0; j < ns; ++j) {
        const double phi_j = phi.value(s_main[j]);
        for (std::size_t k = 0; k < nt; ++k) {
            const double theta = static_cast<double>(k) / nt;
            const Vec2 lhs = f.eval_lift(res.psi_at(j, k));
            const Vec2 rhs = psi_eval(s_main[j] + alpha, epsilon * theta + phi_j, j);
            res.residual_sup =
                std::max(res.residual_sup, std::max(std::abs(lhs[0] - rhs[0]), std::abs(lhs[1] - rhs[1])));
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Independent verification of a ConjugacyResult on a finer, offset grid,
// using only the stored lattice (interpolated), plus the level and area
// diagnostics.
// ---------------------------------------------------------------------------

struct ConjugacyVerification {
    double residual_sup = 0.0;   // conjugacy identity on the offset grid
    double xi_residual = 0.0;    // sup |xi(psi(s,t)) - s|
    double det_residual = 0.0;   // sup |det Dpsi - 1| by central differences
};

inline ConjugacyVerification verify_conjugacy(const TorusMap2& f, const FirstIntegral& xi,
                                              const ConjugacyResult& res, std::size_t refine = 2) {
    if (refine == 0) refine = 1;
    ConjugacyVerification out;
    const std::size_t ms = res.grid_s * refine, mt = res.grid_t * refine;
    for (std::size_t i = 0; i < ms; ++i) {
        const double s = (i + 0.5) / ms;
        const double phi_s = res.phi.value(s);
        for (std::size_t k = 0; k < mt; ++k) {
            const double theta = (k + 0.5) / mt;
            const Vec2 pnt = res.psi_interp(s, theta);
            out.xi_residual = std::max(out.xi_residual, std::abs(xi.value(pnt) - s));
            const Vec2 lhs = f.eval_lift(pnt);
            double eta = res.epsilon * theta + phi_s;
            double s2 = s + res.alpha;
            Vec2 rhs{0.0, 0.0};
            {
                const double qwrap = std::floor(s2);
                s2 -= qwrap;
                const double vwrap = std::floor(eta);
                eta -= vwrap;
                rhs = res.psi_interp(s2, eta);
                rhs[0] += qwrap * res.q[0] + vwrap * res.v[0];
                rhs[1] += qwrap * res.q[1] + vwrap * res.v[1];
            }
            out.residual_sup = std::max(
                out.residual_sup, std::max(std::abs(lhs[0] - rhs[0]), std::abs(lhs[1] - rhs[1])));
        }
    }
    // area check on the stored lattice
    const auto ns = static_cast<long long>(res.grid_s), nt = static_cast<long long>(res.grid_t);
    for (long long j = 0; j < ns; ++j)
        for (long long k = 0; k < nt; ++k) {
            const Vec2 dps = res.psi_wrapped(j + 1, k) - res.psi_wrapped(j - 1, k);
            const Vec2 dpt = res.psi_wrapped(j, k + 1) - res.psi_wrapped(j, k - 1);
            const double ds = 2.0 / static_cast<double>(ns);
            const double dt = 2.0 / static_cast<double>(nt);
            const double d = (dps[0] / ds) * (dpt[1] / dt) - (dps[1] / ds) * (dpt[0] / dt);
            out.det_residual = std::max(out.det_residual, std::abs(d - 1.0));
        }
    return out;
}

}  // namespace torogrow
