#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "torogrow/cocycle.hpp"
#include "torogrow/conjugacy.hpp"
#include "torogrow/errors.hpp"
#include "torogrow/geometry.hpp"

namespace torogrow {

using OrderedJson = nlohmann::ordered_json;

inline OrderedJson matrix_to_json(const MatN& m) {
    OrderedJson rows = OrderedJson::array();
    for (std::size_t i = 0; i < m.n; ++i) {
        OrderedJson row = OrderedJson::array();
        for (std::size_t j = 0; j < m.n; ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline OrderedJson matrix_to_json(const Mat2& m) { return matrix_to_json(MatN(m)); }

inline OrderedJson circle_to_json(const CircleFunction& f) {
    OrderedJson j;
    j["degree"] = f.degree;
    j["const"] = f.constant;
    j["cos"] = f.cos_coeffs;
    j["sin"] = f.sin_coeffs;
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open output file: " + path);
    out << content;
    if (!out) throw InputError("failed writing output file: " + path);
}

inline void write_json_file(const std::string& path, const OrderedJson& j) {
    write_text_file(path, j.dump(2) + "\n");
}

// CSV with the growth curve: one row per schedule entry.
inline void write_growth_csv(const std::string& path, const GrowthReport& rep) {
    std::string out = "n,sup_norm,scaled_norm\n";
    char buf[128];
    for (std::size_t i = 0; i < rep.n_schedule.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g\n",
                      static_cast<long long>(rep.n_schedule[i]), rep.per_n_norms[i],
                      rep.scaled_norms[i]);
        out += buf;
    }
    write_text_file(path, out);
}

// Minimal log-log SVG plot of the growth curve with the fitted power law.
inline std::string growth_svg(const GrowthReport& rep) {
    const int width = 640, height = 480;
    const double ml = 70, mr = 20, mt = 40, mb = 50;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < rep.n_schedule.size(); ++i) {
        if (!(rep.per_n_norms[i] > 0.0) || !std::isfinite(rep.per_n_norms[i])) continue;
        xs.push_back(std::log10(static_cast<double>(rep.n_schedule[i])));
        ys.push_back(std::log10(rep.per_n_norms[i]));
    }
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (!xs.empty()) {
        x0 = x1 = xs[0];
        y0 = y1 = ys[0];
        for (std::size_t i = 1; i < xs.size(); ++i) {
            x0 = std::min(x0, xs[i]);
            x1 = std::max(x1, xs[i]);
            y0 = std::min(y0, ys[i]);
            y1 = std::max(y1, ys[i]);
        }
        if (x1 - x0 < 1e-9) x1 = x0 + 1;
        if (y1 - y0 < 1e-9) y1 = y0 + 1;
    }
    auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (width - ml - mr); };
    auto py = [&](double y) { return height - mb - (y - y0) / (y1 - y0) * (height - mt - mb); };
    char buf[256];
    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"%d\" "
                  "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                  width, height, width, height);
    s += buf;
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", ml,
                  height - mb, static_cast<double>(width - mr), height - mb);
    s += buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", ml, mt,
                  ml, height - mb);
    s += buf;
    s += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">sup |Df^n| vs n (log-log)</text>\n";
    // axis ticks at integer decades
    for (int d = static_cast<int>(std::ceil(x0)); d <= static_cast<int>(std::floor(x1)); ++d) {
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>"
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                      "font-size=\"11\">1e%d</text>\n",
                      px(d), height - mb, px(d), height - mb + 5, px(d), height - mb + 18, d);
        s += buf;
    }
    for (int d = static_cast<int>(std::ceil(y0)); d <= static_cast<int>(std::floor(y1)); ++d) {
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>"
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" font-family=\"sans-serif\" "
                      "font-size=\"11\">1e%d</text>\n",
                      ml - 5, py(d), ml, py(d), ml - 8, py(d) + 4, d);
        s += buf;
    }
    if (!xs.empty()) {
        s += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(xs[i]), py(ys[i]));
            s += buf;
        }
        s += "\"/>\n";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            std::snprintf(buf, sizeof(buf),
                          "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"steelblue\"/>\n",
                          px(xs[i]), py(ys[i]));
            s += buf;
        }
        if (std::isfinite(rep.tau_fit)) {
            const double ln10 = std::log(10.0);
            auto fit_y = [&](double lx) {
                return (rep.fit_intercept + rep.tau_fit * lx * ln10) / ln10;
            };
            std::snprintf(buf, sizeof(buf),
                          "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"tomato\" "
                          "stroke-dasharray=\"5,4\"/>\n",
                          px(x0), py(fit_y(x0)), px(x1), py(fit_y(x1)));
            s += buf;
            std::snprintf(buf, sizeof(buf),
                          "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" "
                          "fill=\"tomato\">slope %.4f</text>\n",
                          ml + 10.0, mt + 16.0, rep.tau_fit);
            s += buf;
        }
    }
    s += "</svg>\n";
    return s;
}

inline OrderedJson growth_report_json(const GrowthReport& rep, const Grid& grid, bool emit_limit) {
    OrderedJson j;
    if (std::isfinite(rep.tau_fit)) j["tau_fit"] = rep.tau_fit;
    else j["tau_fit"] = nullptr;
    if (rep.tau_theoretical) j["tau_theoretical"] = *rep.tau_theoretical;
    j["tau_used"] = rep.tau_used;
    j["classification"] = to_string(rep.classification);
    j["max_log_residual"] = rep.max_log_residual;
    j["n_schedule"] = rep.n_schedule;
    j["sup_norms"] = rep.per_n_norms;
    j["scaled_norms"] = rep.scaled_norms;
    if (rep.residual_sup) j["residual_sup"] = *rep.residual_sup;

    // limit summary: entrywise mean over the grid plus the largest deviation
    if (!rep.limit_estimate.empty()) {
        const std::size_t dim = rep.limit_estimate.front().n;
        MatN mean(dim);
        for (const auto& m : rep.limit_estimate)
            for (std::size_t r = 0; r < dim; ++r)
                for (std::size_t c = 0; c < dim; ++c) mean(r, c) += m(r, c);
        const double inv = 1.0 / static_cast<double>(rep.limit_estimate.size());
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = 0; c < dim; ++c) mean(r, c) *= inv;
        double dev = 0.0;
        for (const auto& m : rep.limit_estimate) dev = std::max(dev, (m - mean).max_abs());
        j["limit_mean"] = matrix_to_json(mean);
        j["limit_max_deviation"] = dev;
    }
    if (emit_limit) {
        OrderedJson pts = OrderedJson::array();
        for (std::size_t i = 0; i < rep.limit_estimate.size(); ++i) {
            OrderedJson e;
            OrderedJson coord = OrderedJson::array();
            for (std::size_t d = 0; d < grid.points[i].dim; ++d) coord.push_back(grid.points[i][d]);
            e["point"] = coord;
            e["matrix"] = matrix_to_json(rep.limit_estimate[i]);
            pts.push_back(e);
        }
        j["limit_estimate"] = pts;
    }
    return j;
}

inline OrderedJson conjugacy_report_json(const ConjugacyResult& res, const ConjugacyVerification& ver,
                                         bool emit_psi) {
    OrderedJson j;
    j["p"] = res.p;
    j["q"] = res.q;
    j["v"] = res.v;
    j["epsilon"] = res.epsilon;
    j["tau_period"] = res.tau_period;
    j["tau_spread"] = res.tau_spread;
    j["lambda"] = res.lambda;
    j["phi"] = circle_to_json(res.phi);
    j["residual_sup"] = res.residual_sup;
    j["xi_residual"] = res.xi_residual;
    j["verify"] = {{"residual_sup", ver.residual_sup},
                   {"xi_residual", ver.xi_residual},
                   {"det_residual", ver.det_residual}};
    if (emit_psi) {
        OrderedJson grid = OrderedJson::array();
        for (std::size_t jj = 0; jj < res.grid_s; ++jj) {
            OrderedJson row = OrderedJson::array();
            for (std::size_t k = 0; k < res.grid_t; ++k) {
                const Vec2& p = res.psi_at(jj, k);
                row.push_back(OrderedJson::array({p[0], p[1]}));
            }
            grid.push_back(row);
        }
        j["psi_grid"] = {{"grid_s", res.grid_s}, {"grid_t", res.grid_t}, {"values", grid}};
    }
    return j;
}

}  // namespace torogrow
