#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "torogrow/errors.hpp"
#include "torogrow/geometry.hpp"
#include "torogrow/parallel.hpp"
#include "torogrow/rng.hpp"
#include "torogrow/systems.hpp"

namespace torogrow {

// ---------------------------------------------------------------------------
// Derivative cocycle Df^n(x) = Df(f^{n-1}x) ... Df(x).
// For the structured skew products the product is triangular and is
// accumulated with running sums instead of matrix multiplies.
// ---------------------------------------------------------------------------

namespace detail {

// Walks one orbit and snapshots n^0-scaled cocycle matrices at the requested
// indices (ascending, >= 1).
template <typename Snap>
void cocycle_walk(const SystemSpec& spec, const TorusPoint& x0, std::span<const long long> ns,
                  Snap&& snap) {
    const long long n_max = ns.empty() ? 0 : ns.back();
    std::size_t next = 0;

    if (const auto* a = std::get_if<AnzaiSpec>(&spec)) {
        double u = 0.0;           // (2,1) entry
        double x1 = x0[0];
        for (long long k = 0; k < n_max; ++k) {
            u += a->phi.derivative(x1);
            x1 = wrap01(x1 + a->alpha);
            while (next < ns.size() && ns[next] == k + 1) {
                MatN m(2);
                m(0, 0) = 1.0;
                m(1, 0) = u;
                m(1, 1) = 1.0;
                snap(next++, m);
            }
        }
        return;
    }
    if (const auto* s = std::get_if<SkewFlipSpec>(&spec)) {
        double u = 0.0;
        double ek = 1.0;          // epsilon^k
        double x1 = x0[0];
        for (long long k = 0; k < n_max; ++k) {
            u = s->phi.derivative(x1) + s->epsilon * u;
            ek *= s->epsilon;
            x1 = wrap01(x1 + s->alpha);
            while (next < ns.size() && ns[next] == k + 1) {
                MatN m(2);
                m(0, 0) = 1.0;
                m(1, 0) = u;
                m(1, 1) = ek;
                snap(next++, m);
            }
        }
        return;
    }
    if (const auto* t = std::get_if<TwoStepSpec>(&spec)) {
        double x1 = x0[0], x2 = x0[1];
        double u = 0.0;   // (2,1)
        double v = 0.0;   // (3,1)
        double w = 0.0;   // (3,2)
        double fk = 1.0;  // flip^k
        for (long long k = 0; k < n_max; ++k) {
            double gval, g1, g2;
            t->gamma.eval_all(x1, x2, gval, g1, g2);
            (void)gval;
            double bval, bder;
            t->beta.value_and_derivative(x1, bval, bder);
            v += g1 + g2 * u;
            w += g2 * fk;
            u = bder + t->flip * u;
            fk *= t->flip;
            x2 = wrap01(t->flip * x2 + bval);
            x1 = wrap01(x1 + t->alpha);
            while (next < ns.size() && ns[next] == k + 1) {
                MatN m(3);
                m(0, 0) = 1.0;
                m(1, 0) = u;
                m(1, 1) = fk;
                m(2, 0) = v;
                m(2, 1) = w;
                m(2, 2) = 1.0;
                snap(next++, m);
            }
        }
        return;
    }
    const auto& n = std::get<AutomorphismSpec>(spec).n;
    MatN acc(3);
    MatN step(3);
    for (int i = 0; i < 3; ++i) {
        acc(i, i) = 1.0;
        for (int j = 0; j < 3; ++j) step(i, j) = static_cast<double>(n.m[i][j]);
    }
    for (long long k = 0; k < n_max; ++k) {
        acc = step * acc;
        while (next < ns.size() && ns[next] == k + 1) snap(next++, acc);
    }
}

inline void require_schedule(std::span<const long long> ns) {
    if (ns.empty()) throw InputError("cocycle: empty schedule");
    long long prev = 0;
    for (long long n : ns) {
        if (n <= prev) throw InputError("cocycle: schedule must be strictly increasing and >= 1");
        prev = n;
    }
}

}  // namespace detail

inline MatN derivative_cocycle(const SystemSpec& spec, const TorusPoint& x, long long n) {
    validate_spec(spec);
    if (n < 1) throw InputError("derivative_cocycle: n must be >= 1");
    if (x.dim != dimension(spec)) throw InputError("derivative_cocycle: dimension mismatch");
    MatN out;
    const long long ns[1] = {n};
    detail::cocycle_walk(spec, x, ns, [&](std::size_t, const MatN& m) { out = m; });
    return out;
}

inline std::vector<MatN> derivative_cocycle_schedule(const SystemSpec& spec, const TorusPoint& x,
                                                     std::span<const long long> ns) {
    validate_spec(spec);
    detail::require_schedule(ns);
    if (x.dim != dimension(spec)) throw InputError("derivative_cocycle: dimension mismatch");
    std::vector<MatN> out(ns.size());
    detail::cocycle_walk(spec, x, ns, [&](std::size_t i, const MatN& m) { out[i] = m; });
    return out;
}

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

struct Grid {
    std::vector<TorusPoint> points;
    std::array<std::size_t, 3> dims{0, 0, 0};  // zero when the grid is irregular
    bool regular = false;

    std::size_t size() const { return points.size(); }

    // Index of the grid point nearest to p (regular grids in O(1)).
    std::size_t nearest(const TorusPoint& p) const {
        if (regular) {
            std::size_t idx = 0;
            for (std::size_t axis = 0; axis < p.dim; ++axis) {
                const auto g = dims[axis];
                auto cell = static_cast<long long>(std::llround(wrap01(p[axis]) * g)) %
                            static_cast<long long>(g);
                idx = idx * g + static_cast<std::size_t>(cell);
            }
            return idx;
        }
        std::size_t best = 0;
        double best_d = 1e300;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const double d = torus_distance(points[i], p);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    }
};

inline Grid make_grid(std::span<const std::size_t> dims) {
    const std::size_t d = dims.size();
    if (d < 1 || d > 3) throw InputError("make_grid: dimension must be 1, 2 or 3");
    Grid g;
    g.regular = true;
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) {
        if (dims[i] == 0) throw InputError("make_grid: zero grid size");
        g.dims[i] = dims[i];
        total *= dims[i];
    }
    g.points.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        TorusPoint p;
        p.dim = d;
        for (std::size_t axis = d; axis-- > 0;) {
            const std::size_t j = rem % dims[axis];
            rem /= dims[axis];
            p.x[axis] = static_cast<double>(j) / static_cast<double>(dims[axis]);
        }
        g.points.push_back(p);
    }
    return g;
}

inline Grid make_grid(std::initializer_list<std::size_t> dims) {
    return make_grid(std::span<const std::size_t>(dims.begin(), dims.size()));
}

// ---------------------------------------------------------------------------
// Growth estimation
// ---------------------------------------------------------------------------

enum class GrowthClass { Polynomial, Bounded, SuperPolynomial };

inline const char* to_string(GrowthClass c) {
    switch (c) {
        case GrowthClass::Polynomial: return "polynomial";
        case GrowthClass::Bounded: return "bounded";
        default: return "super_polynomial";
    }
}

struct TheoreticalLimit {
    double tau = 0.0;
    MatN limit;
};

struct GrowthReport {
    double tau_fit = 0.0;
    double fit_intercept = 0.0;
    double max_log_residual = 0.0;
    std::optional<double> tau_theoretical;
    GrowthClass classification = GrowthClass::Polynomial;
    std::vector<long long> n_schedule;
    std::vector<double> per_n_norms;    // sup over grid of |Df^n| (max entry)
    std::vector<double> scaled_norms;   // n^{-tau_used} * per_n_norms
    double tau_used = 0.0;              // exponent used for limit_estimate
    std::vector<MatN> limit_estimate;   // n_max^{-tau_used} Df^{n_max} per grid point
    std::optional<double> residual_sup; // vs the theoretical limit, when known
};

// Closed-form limits for the structured examples (tau, constant matrix):
//  - two-step with d(beta) != 0, d2(gamma) != 0: tau 2, (3,1) = d(beta) d2(gamma)/2
//  - two-step with constant beta: tau 1, bottom row (d1(gamma), d2(gamma), 0)
//  - two-step with gamma independent of x2 and d(beta) = 0: tau 1, (3,1) = d1(gamma)
//  - flipped variant with gamma independent of x2: tau 1, (3,1) = d1(gamma)
//  - Anzai with d(phi) != 0: tau 1, (2,1) = d(phi)
inline std::optional<TheoreticalLimit> theoretical_limit(const SystemSpec& spec) {
    if (const auto* a = std::get_if<AnzaiSpec>(&spec)) {
        if (a->phi.degree == 0) return std::nullopt;
        TheoreticalLimit t;
        t.tau = 1.0;
        t.limit = MatN(2);
        t.limit(1, 0) = a->phi.degree;
        return t;
    }
    const auto* ts = std::get_if<TwoStepSpec>(&spec);
    if (ts == nullptr) return std::nullopt;
    const int d_beta = ts->beta.degree;
    const int d1 = ts->gamma.degrees[0];
    const int d2 = ts->gamma.degrees[1];
    if (ts->flip == -1) {
        if (ts->gamma.depends_on_x2() || d1 == 0) return std::nullopt;
        TheoreticalLimit t;
        t.tau = 1.0;
        t.limit = MatN(3);
        t.limit(2, 0) = d1;
        return t;
    }
    if (d_beta != 0 && d2 != 0) {
        TheoreticalLimit t;
        t.tau = 2.0;
        t.limit = MatN(3);
        t.limit(2, 0) = 0.5 * d_beta * d2;
        return t;
    }
    if (ts->beta.is_constant()) {
        if (d1 == 0 && d2 == 0) return std::nullopt;
        TheoreticalLimit t;
        t.tau = 1.0;
        t.limit = MatN(3);
        t.limit(2, 0) = d1;
        t.limit(2, 1) = d2;
        return t;
    }
    if (!ts->gamma.depends_on_x2() && d_beta == 0 && d1 != 0) {
        TheoreticalLimit t;
        t.tau = 1.0;
        t.limit = MatN(3);
        t.limit(2, 0) = d1;
        return t;
    }
    return std::nullopt;
}

inline GrowthReport estimate_growth(const SystemSpec& spec, const Grid& grid,
                                    std::span<const long long> n_schedule,
                                    std::optional<double> tau_hint = std::nullopt) {
    validate_spec(spec);
    detail::require_schedule(n_schedule);
    if (n_schedule.size() < 2) throw InputError("estimate_growth: schedule needs >= 2 values");
    if (grid.points.empty()) throw InputError("estimate_growth: empty grid");
    const std::size_t dim = dimension(spec);
    for (const auto& p : grid.points)
        if (p.dim != dim) throw InputError("estimate_growth: grid dimension mismatch");

    GrowthReport rep;
    rep.n_schedule.assign(n_schedule.begin(), n_schedule.end());
    const std::size_t n_pts = grid.points.size();
    const std::size_t n_ns = n_schedule.size();
    const long long n_max = n_schedule.back();

    rep.limit_estimate.resize(n_pts);
    const std::size_t n_chunks = std::min<std::size_t>(256, n_pts);
    std::vector<std::vector<double>> chunk_norms(n_chunks, std::vector<double>(n_ns, 0.0));

    parallel_chunks(n_pts, n_chunks, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
        auto& local = chunk_norms[chunk];
        for (std::size_t i = begin; i < end; ++i) {
            detail::cocycle_walk(spec, grid.points[i], n_schedule,
                                 [&](std::size_t si, const MatN& m) {
                                     local[si] = std::max(local[si], m.max_abs());
                                     if (si + 1 == n_ns) rep.limit_estimate[i] = m;
                                 });
        }
    });

    rep.per_n_norms.assign(n_ns, 0.0);
    for (const auto& local : chunk_norms)
        for (std::size_t si = 0; si < n_ns; ++si)
            rep.per_n_norms[si] = std::max(rep.per_n_norms[si], local[si]);

    // least-squares slope of log norm vs log n over the last half of the schedule
    bool finite = true;
    for (double v : rep.per_n_norms)
        if (!std::isfinite(v) || v <= 0.0) finite = false;

    if (finite) {
        // last half of the schedule, but never fewer than two points
        const std::size_t fit_begin = std::min(n_ns / 2, n_ns - 2);
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const std::size_t m = n_ns - fit_begin;
        for (std::size_t i = fit_begin; i < n_ns; ++i) {
            const double lx = std::log(static_cast<double>(n_schedule[i]));
            const double ly = std::log(rep.per_n_norms[i]);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        const double denom = m * sxx - sx * sx;
        if (m < 2 || std::abs(denom) < 1e-12 * m * sxx)
            throw InputError("estimate_growth: degenerate fit (no variance in log n)");
        rep.tau_fit = (m * sxy - sx * sy) / denom;
        rep.fit_intercept = (sy - rep.tau_fit * sx) / m;
        for (std::size_t i = fit_begin; i < n_ns; ++i) {
            const double lx = std::log(static_cast<double>(n_schedule[i]));
            const double ly = std::log(rep.per_n_norms[i]);
            rep.max_log_residual =
                std::max(rep.max_log_residual, std::abs(ly - (rep.fit_intercept + rep.tau_fit * lx)));
        }
        if (rep.tau_fit < 0.25)
            rep.classification = GrowthClass::Bounded;
        else if (rep.max_log_residual > 0.5 || rep.tau_fit > 10.0)
            rep.classification = GrowthClass::SuperPolynomial;
        else
            rep.classification = GrowthClass::Polynomial;
    } else {
        rep.tau_fit = std::numeric_limits<double>::quiet_NaN();
        rep.classification = GrowthClass::SuperPolynomial;
    }

    rep.tau_used = tau_hint.has_value() ? *tau_hint : (std::isfinite(rep.tau_fit) ? rep.tau_fit : 0.0);
    const double scale = std::pow(static_cast<double>(n_max), -rep.tau_used);
    for (auto& m : rep.limit_estimate) m = m.scaled(scale);
    rep.scaled_norms.resize(n_ns);
    for (std::size_t i = 0; i < n_ns; ++i)
        rep.scaled_norms[i] =
            rep.per_n_norms[i] * std::pow(static_cast<double>(n_schedule[i]), -rep.tau_used);

    if (const auto th = theoretical_limit(spec)) {
        rep.tau_theoretical = th->tau;
        // residual against the theoretical limit, at the theoretical exponent
        const double th_scale = std::pow(static_cast<double>(n_max), -th->tau);
        double sup = 0.0;
        for (std::size_t i = 0; i < n_pts; ++i) {
            MatN scaled_back = rep.limit_estimate[i].scaled(th_scale / scale);
            sup = std::max(sup, (scaled_back - th->limit).max_abs());
        }
        rep.residual_sup = sup;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Limit-function identities: g^2 = 0, g(x) = g(f^n x) Df^n(x),
// g(x) g(y) = 0, g(x) = Df(y) g(x).
// ---------------------------------------------------------------------------

struct LimitIdentityReport {
    double square_residual = 0.0;
    double cocycle_residual = 0.0;
    double pair_product_residual = 0.0;
    double commute_residual = 0.0;

    double max_residual() const {
        return std::max(std::max(square_residual, cocycle_residual),
                        std::max(pair_product_residual, commute_residual));
    }
};

// limits[i] is the estimated limit matrix at grid.points[i]; g at an orbit
// image is looked up at the nearest grid point.
inline LimitIdentityReport check_limit_identities(const SystemSpec& spec, const Grid& grid,
                                                  const std::vector<MatN>& limits, long long n_probe,
                                                  std::size_t max_pair_samples = 64) {
    validate_spec(spec);
    if (grid.points.size() != limits.size())
        throw InputError("check_limit_identities: grid/limit size mismatch");
    if (n_probe < 1) throw InputError("check_limit_identities: n_probe must be >= 1");
    const std::size_t n_pts = grid.points.size();

    LimitIdentityReport rep;
    for (const auto& g : limits) rep.square_residual = std::max(rep.square_residual, (g * g).max_abs());

    const std::size_t n_chunks = std::min<std::size_t>(256, n_pts);
    std::vector<double> chunk_res(n_chunks, 0.0);
    parallel_chunks(n_pts, n_chunks, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
        double local = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const TorusPoint y = iterate(spec, grid.points[i], n_probe);
            const MatN& gy = limits[grid.nearest(y)];
            const MatN d = derivative_cocycle(spec, grid.points[i], n_probe);
            local = std::max(local, (limits[i] - gy * d).max_abs());
        }
        chunk_res[chunk] = local;
    });
    for (double v : chunk_res) rep.cocycle_residual = std::max(rep.cocycle_residual, v);

    // deterministic subsample for the pair identities
    std::vector<std::size_t> sample;
    const std::size_t count = std::min(max_pair_samples, n_pts);
    for (std::size_t k = 0; k < count; ++k) sample.push_back(k * n_pts / count);
    for (std::size_t i : sample) {
        for (std::size_t j : sample) {
            rep.pair_product_residual =
                std::max(rep.pair_product_residual, (limits[i] * limits[j]).max_abs());
        }
        for (std::size_t j : sample) {
            const MatN dfy = jacobian(spec, grid.points[j]);
            rep.commute_residual = std::max(rep.commute_residual, (limits[i] - dfy * limits[i]).max_abs());
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Monte Carlo L1 growth for random Anzai systems
// ---------------------------------------------------------------------------

struct RandomGrowthReport {
    int samples = 0;
    long long n = 0;
    Mat2 mean_scaled;   // entrywise average of n^{-1} Df^n over samples
    Mat2 theoretical;   // (2,1) = mean topological degree of phi, rest 0
    double l1_error = 0.0;  // mean over samples of the entrywise L1 distance
};

inline RandomGrowthReport random_growth_mc(const RandomAnzaiSpec& spec, int samples, long long n,
                                           std::uint64_t seed) {
    if (samples < 1) throw InputError("random_growth_mc: samples must be >= 1");
    if (n < 1) throw InputError("random_growth_mc: n must be >= 1");
    RandomGrowthReport rep;
    rep.samples = samples;
    rep.n = n;
    rep.theoretical(1, 0) = static_cast<double>(spec.x_degree);

    // draw all starting points up front so the sample set is independent of
    // the parallel chunking
    std::vector<std::array<double, 2>> starts(samples);
    Rng rng(seed);
    for (auto& s : starts) {
        s[0] = rng.uniform01();
        s[1] = rng.uniform01();
    }

    const std::size_t n_chunks = std::min<std::size_t>(64, static_cast<std::size_t>(samples));
    struct Acc {
        CompensatedSum entry21;
        CompensatedSum l1;
    };
    std::vector<Acc> accs(n_chunks);
    parallel_chunks(static_cast<std::size_t>(samples), n_chunks,
                    [&](std::size_t begin, std::size_t end, std::size_t chunk) {
                        auto& acc = accs[chunk];
                        for (std::size_t s = begin; s < end; ++s) {
                            double omega = starts[s][0];
                            double x1 = starts[s][1];
                            CompensatedSum dsum;
                            for (long long k = 0; k < n; ++k) {
                                dsum.add(spec.phi_deriv(omega, x1));
                                x1 += spec.alpha.value(omega);
                                omega += spec.base_theta;
                            }
                            const double scaled21 = dsum.value() / static_cast<double>(n);
                            acc.entry21.add(scaled21);
                            const double diag = 1.0 / static_cast<double>(n);
                            acc.l1.add(std::abs(scaled21 - rep.theoretical(1, 0)) + 2.0 * diag);
                        }
                    });

    CompensatedSum e21, l1;
    for (const auto& acc : accs) {
        e21.add(acc.entry21.value());
        l1.add(acc.l1.value());
    }
    rep.mean_scaled(0, 0) = 1.0 / static_cast<double>(n);
    rep.mean_scaled(1, 1) = 1.0 / static_cast<double>(n);
    rep.mean_scaled(1, 0) = e21.value() / samples;
    rep.l1_error = l1.value() / samples;
    return rep;
}

// ---------------------------------------------------------------------------
// Sublinear drift quantity from the special-flow picture:
//   sup over M' of (1/n) |Db^{(m)}(x1 + n alpha)|,
// where m is the return index of the n-th image under T_{alpha,beta}.
// ---------------------------------------------------------------------------

inline double sublinear_drift(const SpecialFlowSpec& spec, std::size_t grid_x1, std::size_t grid_x2,
                              long long n) {
    if (grid_x1 == 0 || grid_x2 == 0) throw InputError("sublinear_drift: empty grid");
    if (n < 1) throw InputError("sublinear_drift: n must be >= 1");
    const std::size_t n_chunks = std::min<std::size_t>(64, grid_x1);
    std::vector<double> chunk_sup(n_chunks, 0.0);
    parallel_chunks(grid_x1, n_chunks, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
        double local = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double x1 = static_cast<double>(i) / grid_x1;
            CompensatedSum beta_sum;  // beta^{(n)}(x1) over the rotation by alpha
            for (long long k = 0; k < n; ++k) beta_sum.add(spec.beta.value(x1 + k * spec.alpha));
            const double y1 = x1 + n * spec.alpha;
            const double b_here = spec.roof(x1);
            for (std::size_t j = 0; j < grid_x2; ++j) {
                const double x2 = (j + 0.5) / grid_x2 * b_here;
                const double y2 = x2 + beta_sum.value();
                const long long m = return_index(spec, y1, y2);
                local = std::max(local, std::abs(roof_deriv_birkhoff(spec, y1, m)) / n);
            }
        }
        chunk_sup[chunk] = local;
    });
    double sup = 0.0;
    for (double v : chunk_sup) sup = std::max(sup, v);
    return sup;
}

}  // namespace torogrow
