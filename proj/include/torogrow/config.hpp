#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "torogrow/circle_function.hpp"
#include "torogrow/cocycle.hpp"
#include "torogrow/conjugacy.hpp"
#include "torogrow/errors.hpp"
#include "torogrow/systems.hpp"

namespace torogrow {

inline constexpr const char* kSchemaVersion = "torogrow/1";

// Collects all schema violations with their JSON-pointer paths.
class SchemaError : public InputError {
public:
    explicit SchemaError(std::vector<std::string> issues)
        : InputError(join(issues)), issues_(std::move(issues)) {}

    const std::vector<std::string>& issues() const { return issues_; }

private:
    static std::string join(const std::vector<std::string>& issues) {
        std::string s = "config schema violations:";
        for (const auto& i : issues) s += "\n  " + i;
        return s;
    }
    std::vector<std::string> issues_;
};

namespace cfg_detail {

using nlohmann::json;

struct Ctx {
    std::vector<std::string> issues;

    void fail(const std::string& path, const std::string& msg) { issues.push_back(path + ": " + msg); }
};

inline void check_keys(const json& j, const std::string& path, Ctx& ctx,
                       const std::set<std::string>& allowed) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) ctx.fail(path + "/" + it.key(), "unknown key");
}

inline const json* get_member(const json& j, const std::string& path, Ctx& ctx,
                              const std::string& key, bool required) {
    if (!j.is_object()) {
        ctx.fail(path, "expected an object");
        return nullptr;
    }
    const auto it = j.find(key);
    if (it == j.end()) {
        if (required) ctx.fail(path + "/" + key, "missing required key");
        return nullptr;
    }
    return &*it;
}

// Reals may be plain numbers or the symbolic irrational tokens.
inline double parse_real(const json& j, const std::string& path, Ctx& ctx, double fallback = 0.0) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "sqrt2m1") return 0.41421356237309514547;   // sqrt(2) - 1
        if (s == "golden") return 0.61803398874989490253;    // (sqrt(5) - 1)/2
        if (s == "sqrt3m1") return 0.73205080756887719318;   // sqrt(3) - 1
        if (s == "sqrt5m2") return 0.23606797749978969641;   // sqrt(5) - 2
        ctx.fail(path, "unknown irrational token '" + s + "'");
        return fallback;
    }
    ctx.fail(path, "expected a number or irrational token");
    return fallback;
}

inline long long parse_int(const json& j, const std::string& path, Ctx& ctx, long long fallback = 0) {
    if (j.is_number_integer()) return j.get<long long>();
    ctx.fail(path, "expected an integer");
    return fallback;
}

inline std::vector<double> parse_real_array(const json& j, const std::string& path, Ctx& ctx) {
    std::vector<double> out;
    if (!j.is_array()) {
        ctx.fail(path, "expected an array");
        return out;
    }
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(parse_real(j[i], path + "/" + std::to_string(i), ctx));
    return out;
}

inline CircleFunction parse_circle(const json& j, const std::string& path, Ctx& ctx) {
    CircleFunction f;
    if (!j.is_object()) {
        ctx.fail(path, "expected a circle-function object");
        return f;
    }
    check_keys(j, path, ctx, {"degree", "const", "cos", "sin"});
    if (const json* d = get_member(j, path, ctx, "degree", false))
        f.degree = static_cast<int>(parse_int(*d, path + "/degree", ctx));
    if (const json* c = get_member(j, path, ctx, "const", false))
        f.constant = parse_real(*c, path + "/const", ctx);
    if (const json* c = get_member(j, path, ctx, "cos", false))
        f.cos_coeffs = parse_real_array(*c, path + "/cos", ctx);
    if (const json* s = get_member(j, path, ctx, "sin", false))
        f.sin_coeffs = parse_real_array(*s, path + "/sin", ctx);
    return f;
}

inline Torus2Function parse_torus2(const json& j, const std::string& path, Ctx& ctx) {
    Torus2Function f;
    if (!j.is_object()) {
        ctx.fail(path, "expected a torus-function object");
        return f;
    }
    check_keys(j, path, ctx, {"degrees", "const", "terms"});
    if (const json* d = get_member(j, path, ctx, "degrees", false)) {
        if (!d->is_array() || d->size() != 2) {
            ctx.fail(path + "/degrees", "expected [d1, d2]");
        } else {
            f.degrees[0] = static_cast<int>(parse_int((*d)[0], path + "/degrees/0", ctx));
            f.degrees[1] = static_cast<int>(parse_int((*d)[1], path + "/degrees/1", ctx));
        }
    }
    if (const json* c = get_member(j, path, ctx, "const", false))
        f.constant = parse_real(*c, path + "/const", ctx);
    if (const json* t = get_member(j, path, ctx, "terms", false)) {
        if (!t->is_array()) {
            ctx.fail(path + "/terms", "expected an array");
        } else {
            for (std::size_t i = 0; i < t->size(); ++i) {
                const std::string tp = path + "/terms/" + std::to_string(i);
                const json& te = (*t)[i];
                if (!te.is_object()) {
                    ctx.fail(tp, "expected an object");
                    continue;
                }
                check_keys(te, tp, ctx, {"k", "cos", "sin"});
                Torus2Term term;
                if (const json* k = get_member(te, tp, ctx, "k", true)) {
                    if (!k->is_array() || k->size() != 2) {
                        ctx.fail(tp + "/k", "expected [k1, k2]");
                    } else {
                        term.k1 = static_cast<int>(parse_int((*k)[0], tp + "/k/0", ctx));
                        term.k2 = static_cast<int>(parse_int((*k)[1], tp + "/k/1", ctx));
                    }
                }
                if (const json* c = get_member(te, tp, ctx, "cos", false))
                    term.cos_coeff = parse_real(*c, tp + "/cos", ctx);
                if (const json* s = get_member(te, tp, ctx, "sin", false))
                    term.sin_coeff = parse_real(*s, tp + "/sin", ctx);
                f.terms.push_back(term);
            }
        }
    }
    return f;
}

inline SystemSpec parse_system(const json& j, const std::string& path, Ctx& ctx) {
    SystemSpec spec = AnzaiSpec{};
    if (!j.is_object()) {
        ctx.fail(path, "expected a system object");
        return spec;
    }
    const json* tp = get_member(j, path, ctx, "type", true);
    if (tp == nullptr || !tp->is_string()) {
        if (tp != nullptr) ctx.fail(path + "/type", "expected a string");
        return spec;
    }
    const std::string type = tp->get<std::string>();
    if (type == "anzai") {
        check_keys(j, path, ctx, {"type", "alpha", "phi"});
        AnzaiSpec s;
        if (const json* a = get_member(j, path, ctx, "alpha", true))
            s.alpha = parse_real(*a, path + "/alpha", ctx);
        if (const json* p = get_member(j, path, ctx, "phi", true))
            s.phi = parse_circle(*p, path + "/phi", ctx);
        spec = s;
    } else if (type == "skew_flip") {
        check_keys(j, path, ctx, {"type", "alpha", "epsilon", "phi"});
        SkewFlipSpec s;
        if (const json* a = get_member(j, path, ctx, "alpha", true))
            s.alpha = parse_real(*a, path + "/alpha", ctx);
        if (const json* e = get_member(j, path, ctx, "epsilon", true))
            s.epsilon = static_cast<int>(parse_int(*e, path + "/epsilon", ctx, 1));
        if (const json* p = get_member(j, path, ctx, "phi", true))
            s.phi = parse_circle(*p, path + "/phi", ctx);
        if (s.epsilon != 1 && s.epsilon != -1) ctx.fail(path + "/epsilon", "must be +1 or -1");
        spec = s;
    } else if (type == "two_step") {
        check_keys(j, path, ctx, {"type", "alpha", "beta", "gamma", "flip"});
        TwoStepSpec s;
        if (const json* a = get_member(j, path, ctx, "alpha", true))
            s.alpha = parse_real(*a, path + "/alpha", ctx);
        if (const json* b = get_member(j, path, ctx, "beta", true))
            s.beta = parse_circle(*b, path + "/beta", ctx);
        if (const json* g = get_member(j, path, ctx, "gamma", true))
            s.gamma = parse_torus2(*g, path + "/gamma", ctx);
        if (const json* fl = get_member(j, path, ctx, "flip", false))
            s.flip = static_cast<int>(parse_int(*fl, path + "/flip", ctx, 1));
        if (s.flip != 1 && s.flip != -1) ctx.fail(path + "/flip", "must be +1 or -1");
        spec = s;
    } else if (type == "automorphism") {
        check_keys(j, path, ctx, {"type", "matrix"});
        AutomorphismSpec s;
        if (const json* m = get_member(j, path, ctx, "matrix", true)) {
            if (!m->is_array() || m->size() != 3) {
                ctx.fail(path + "/matrix", "expected a 3x3 integer matrix");
            } else {
                for (int i = 0; i < 3; ++i) {
                    const json& row = (*m)[i];
                    if (!row.is_array() || row.size() != 3) {
                        ctx.fail(path + "/matrix/" + std::to_string(i), "expected a row of 3 integers");
                        continue;
                    }
                    for (int c = 0; c < 3; ++c)
                        s.n(i, c) = parse_int(row[c],
                                              path + "/matrix/" + std::to_string(i) + "/" +
                                                  std::to_string(c),
                                              ctx);
                }
                if (ctx.issues.empty() && !s.n.is_unimodular())
                    ctx.fail(path + "/matrix", "determinant must be +1 or -1");
            }
        }
        spec = s;
    } else {
        ctx.fail(path + "/type", "unknown system type '" + type + "'");
    }
    return spec;
}

inline std::shared_ptr<const TorusMap2> parse_map2(const json& j, const std::string& path, Ctx& ctx);

inline std::shared_ptr<const TorusMap2> parse_map2_single(const json& j, const std::string& path,
                                                          Ctx& ctx) {
    if (!j.is_object()) {
        ctx.fail(path, "expected a map object");
        return nullptr;
    }
    const json* tp = get_member(j, path, ctx, "type", true);
    if (tp == nullptr || !tp->is_string()) return nullptr;
    const std::string type = tp->get<std::string>();
    try {
        if (type == "skew") {
            check_keys(j, path, ctx, {"type", "alpha", "epsilon", "phi"});
            SkewFlipSpec s;
            if (const json* a = get_member(j, path, ctx, "alpha", true))
                s.alpha = parse_real(*a, path + "/alpha", ctx);
            if (const json* e = get_member(j, path, ctx, "epsilon", false))
                s.epsilon = static_cast<int>(parse_int(*e, path + "/epsilon", ctx, 1));
            if (const json* p = get_member(j, path, ctx, "phi", true))
                s.phi = parse_circle(*p, path + "/phi", ctx);
            if (!ctx.issues.empty()) return nullptr;
            return std::make_shared<SkewProductMap>(s);
        }
        if (type == "linear") {
            check_keys(j, path, ctx, {"type", "matrix"});
            ILin2 m{{{1, 0}, {0, 1}}};
            if (const json* mj = get_member(j, path, ctx, "matrix", true)) {
                if (!mj->is_array() || mj->size() != 2 || !(*mj)[0].is_array() ||
                    (*mj)[0].size() != 2 || !(*mj)[1].is_array() || (*mj)[1].size() != 2) {
                    ctx.fail(path + "/matrix", "expected a 2x2 integer matrix");
                    return nullptr;
                }
                for (int i = 0; i < 2; ++i)
                    for (int c = 0; c < 2; ++c)
                        m[i][c] = parse_int((*mj)[i][c],
                                            path + "/matrix/" + std::to_string(i) + "/" +
                                                std::to_string(c),
                                            ctx);
            }
            if (!ctx.issues.empty()) return nullptr;
            return std::make_shared<LinearTorusMap>(m);
        }
        if (type == "shear") {
            check_keys(j, path, ctx, {"type", "axis", "g"});
            int axis = 0;
            CircleFunction g;
            if (const json* a = get_member(j, path, ctx, "axis", true))
                axis = static_cast<int>(parse_int(*a, path + "/axis", ctx));
            if (const json* gj = get_member(j, path, ctx, "g", true))
                g = parse_circle(*gj, path + "/g", ctx);
            if (!ctx.issues.empty()) return nullptr;
            return std::make_shared<ShearMap>(axis, g);
        }
    } catch (const InputError& e) {
        ctx.fail(path, e.what());
        return nullptr;
    }
    ctx.fail(path + "/type", "unknown map type '" + type + "'");
    return nullptr;
}

inline std::shared_ptr<const TorusMap2> parse_map2(const json& j, const std::string& path, Ctx& ctx) {
    if (j.is_object() && j.contains("chain")) {
        check_keys(j, path, ctx, {"chain"});
        const json& ch = j["chain"];
        if (!ch.is_array() || ch.empty()) {
            ctx.fail(path + "/chain", "expected a non-empty array of maps");
            return nullptr;
        }
        std::vector<std::shared_ptr<const TorusMap2>> maps;
        for (std::size_t i = 0; i < ch.size(); ++i) {
            auto m = parse_map2_single(ch[i], path + "/chain/" + std::to_string(i), ctx);
            if (m) maps.push_back(std::move(m));
        }
        if (!ctx.issues.empty() || maps.size() != ch.size()) return nullptr;
        return std::make_shared<ChainMap2>(std::move(maps));
    }
    return parse_map2_single(j, path, ctx);
}

inline RandomAnzaiSpec parse_random_anzai(const json& j, const std::string& path, Ctx& ctx) {
    RandomAnzaiSpec spec;
    if (!j.is_object()) {
        ctx.fail(path, "expected an object");
        return spec;
    }
    check_keys(j, path, ctx, {"base_theta", "alpha", "phi"});
    if (const json* t = get_member(j, path, ctx, "base_theta", true))
        spec.base_theta = parse_real(*t, path + "/base_theta", ctx);
    if (const json* a = get_member(j, path, ctx, "alpha", true)) {
        if (a->is_object())
            spec.alpha = parse_circle(*a, path + "/alpha", ctx);
        else
            spec.alpha = CircleFunction::constant_map(parse_real(*a, path + "/alpha", ctx));
    }
    if (const json* p = get_member(j, path, ctx, "phi", true)) {
        if (!p->is_object()) {
            ctx.fail(path + "/phi", "expected an object");
            return spec;
        }
        const std::string pp = path + "/phi";
        check_keys(*p, pp, ctx, {"x_degree", "offset", "cos", "sin"});
        if (const json* d = get_member(*p, pp, ctx, "x_degree", false))
            spec.x_degree = static_cast<int>(parse_int(*d, pp + "/x_degree", ctx));
        if (const json* o = get_member(*p, pp, ctx, "offset", false))
            spec.offset = parse_circle(*o, pp + "/offset", ctx);
        for (const char* key : {"cos", "sin"}) {
            const json* arr = get_member(*p, pp, ctx, key, false);
            if (arr == nullptr) continue;
            if (!arr->is_array()) {
                ctx.fail(pp + "/" + key, "expected an array of circle functions");
                continue;
            }
            auto& dst = (key[0] == 'c') ? spec.cos_k : spec.sin_k;
            for (std::size_t i = 0; i < arr->size(); ++i)
                dst.push_back(parse_circle((*arr)[i], pp + "/" + key + "/" + std::to_string(i), ctx));
        }
    }
    return spec;
}

}  // namespace cfg_detail

// ---------------------------------------------------------------------------
// Parsed run configuration
// ---------------------------------------------------------------------------

struct OutputPaths {
    std::optional<std::string> json_path;
    std::optional<std::string> csv_path;
    std::optional<std::string> svg_path;
};

struct GrowthCommand {
    SystemSpec system = AnzaiSpec{};
    std::vector<std::size_t> grid_dims;
    std::vector<long long> n_schedule;
    std::optional<double> tau_hint;
    bool emit_limit = false;
    std::optional<long long> identities_n_probe;
    std::size_t identities_pair_samples = 64;
};

struct LatticeCommand {
    IVec3 c{};
    std::vector<IVec3> membership_queries;
};

struct NilpotentCommand {
    std::size_t dim = 3;
    Mat3 matrix3{};
    Mat2 matrix2{};
    std::optional<Mat3> pair_with;
};

struct ConjugateCommand {
    std::shared_ptr<const TorusMap2> map;
    std::array<long long, 2> p{1, 0};
    Torus2Function xi_periodic;
    double alpha = 0.0;
    ConjugacyConfig cfg;
    double residual_accept = 1e-4;
    std::size_t verify_refine = 2;
    bool emit_psi = false;
};

struct RandomGrowthCommand {
    RandomAnzaiSpec spec;
    int samples = 1000;
    long long n = 1000;
};

struct DriftCommand {
    double a = 0.0;
    CircleFunction roof_periodic;
    double alpha = 0.0;
    CircleFunction beta;
    std::size_t grid_x1 = 128;
    std::size_t grid_x2 = 8;
    std::vector<long long> n_values;
};

struct RunConfig {
    std::string command;
    std::uint64_t seed = 0;
    OutputPaths output;
    std::variant<GrowthCommand, LatticeCommand, NilpotentCommand, ConjugateCommand,
                 RandomGrowthCommand, DriftCommand>
        payload = GrowthCommand{};
};

inline RunConfig parse_config(const nlohmann::json& root) {
    using namespace cfg_detail;
    Ctx ctx;
    RunConfig rc;

    if (!root.is_object()) {
        ctx.fail("", "top-level config must be an object");
        throw SchemaError(ctx.issues);
    }
    check_keys(root, "", ctx,
               {"schema", "command", "seed", "output", "growth", "lattice", "nilpotent", "conjugate",
                "random-growth", "drift"});

    if (const json* s = get_member(root, "", ctx, "schema", true)) {
        if (!s->is_string() || s->get<std::string>() != kSchemaVersion)
            ctx.fail("/schema", std::string("expected \"") + kSchemaVersion + "\"");
    }
    std::string command;
    if (const json* c = get_member(root, "", ctx, "command", true)) {
        if (c->is_string())
            command = c->get<std::string>();
        else
            ctx.fail("/command", "expected a string");
    }
    rc.command = command;
    if (const json* s = get_member(root, "", ctx, "seed", false)) {
        if (s->is_number_unsigned() || s->is_number_integer())
            rc.seed = s->get<std::uint64_t>();
        else
            ctx.fail("/seed", "expected an unsigned integer");
    }
    if (const json* o = get_member(root, "", ctx, "output", false)) {
        check_keys(*o, "/output", ctx, {"json", "csv", "svg"});
        auto get_path = [&](const char* key) -> std::optional<std::string> {
            const json* p = get_member(*o, "/output", ctx, key, false);
            if (p == nullptr) return std::nullopt;
            if (!p->is_string()) {
                ctx.fail(std::string("/output/") + key, "expected a string");
                return std::nullopt;
            }
            return p->get<std::string>();
        };
        rc.output.json_path = get_path("json");
        rc.output.csv_path = get_path("csv");
        rc.output.svg_path = get_path("svg");
    }

    static const std::set<std::string> commands{"growth",    "lattice",       "nilpotent",
                                                "conjugate", "random-growth", "drift"};
    if (!commands.count(command)) {
        if (!command.empty()) ctx.fail("/command", "unknown command '" + command + "'");
        throw SchemaError(ctx.issues);
    }
    for (const auto& other : commands)
        if (other != command && root.contains(other))
            ctx.fail("/" + other, "block does not match command '" + command + "'");

    const json* block = get_member(root, "", ctx, command, true);
    if (block == nullptr) throw SchemaError(ctx.issues);
    const std::string bp = "/" + command;

    if (command == "growth") {
        GrowthCommand cmd;
        check_keys(*block, bp, ctx,
                   {"system", "grid", "n_schedule", "tau_hint", "emit_limit", "identities"});
        if (const json* s = get_member(*block, bp, ctx, "system", true))
            cmd.system = parse_system(*s, bp + "/system", ctx);
        if (const json* g = get_member(*block, bp, ctx, "grid", true)) {
            check_keys(*g, bp + "/grid", ctx, {"dims"});
            if (const json* d = get_member(*g, bp + "/grid", ctx, "dims", true)) {
                if (!d->is_array() || d->empty() || d->size() > 3) {
                    ctx.fail(bp + "/grid/dims", "expected 1-3 grid sizes");
                } else {
                    for (std::size_t i = 0; i < d->size(); ++i) {
                        const long long v =
                            parse_int((*d)[i], bp + "/grid/dims/" + std::to_string(i), ctx, 1);
                        if (v < 1)
                            ctx.fail(bp + "/grid/dims/" + std::to_string(i), "must be >= 1");
                        else
                            cmd.grid_dims.push_back(static_cast<std::size_t>(v));
                    }
                }
            }
        }
        if (const json* n = get_member(*block, bp, ctx, "n_schedule", true)) {
            if (n->is_array()) {
                for (std::size_t i = 0; i < n->size(); ++i)
                    cmd.n_schedule.push_back(
                        parse_int((*n)[i], bp + "/n_schedule/" + std::to_string(i), ctx, 1));
            } else if (n->is_object()) {
                check_keys(*n, bp + "/n_schedule", ctx, {"geometric"});
                if (const json* g = get_member(*n, bp + "/n_schedule", ctx, "geometric", true)) {
                    check_keys(*g, bp + "/n_schedule/geometric", ctx, {"from", "to", "factor"});
                    long long from = 16, to = 16384, factor = 2;
                    if (const json* v = get_member(*g, bp + "/n_schedule/geometric", ctx, "from", true))
                        from = parse_int(*v, bp + "/n_schedule/geometric/from", ctx, 16);
                    if (const json* v = get_member(*g, bp + "/n_schedule/geometric", ctx, "to", true))
                        to = parse_int(*v, bp + "/n_schedule/geometric/to", ctx, 16384);
                    if (const json* v =
                            get_member(*g, bp + "/n_schedule/geometric", ctx, "factor", false))
                        factor = parse_int(*v, bp + "/n_schedule/geometric/factor", ctx, 2);
                    if (from < 1 || to < from || factor < 2)
                        ctx.fail(bp + "/n_schedule/geometric", "need 1 <= from <= to and factor >= 2");
                    else
                        for (long long v = from; v <= to; v *= factor) cmd.n_schedule.push_back(v);
                }
            } else {
                ctx.fail(bp + "/n_schedule", "expected an array or {geometric: ...}");
            }
        }
        if (const json* t = get_member(*block, bp, ctx, "tau_hint", false))
            cmd.tau_hint = parse_real(*t, bp + "/tau_hint", ctx);
        if (const json* e = get_member(*block, bp, ctx, "emit_limit", false)) {
            if (e->is_boolean())
                cmd.emit_limit = e->get<bool>();
            else
                ctx.fail(bp + "/emit_limit", "expected a boolean");
        }
        if (const json* idn = get_member(*block, bp, ctx, "identities", false)) {
            check_keys(*idn, bp + "/identities", ctx, {"n_probe", "pair_samples"});
            if (const json* np = get_member(*idn, bp + "/identities", ctx, "n_probe", true))
                cmd.identities_n_probe = parse_int(*np, bp + "/identities/n_probe", ctx, 1);
            if (const json* ps = get_member(*idn, bp + "/identities", ctx, "pair_samples", false))
                cmd.identities_pair_samples = static_cast<std::size_t>(
                    std::max<long long>(1, parse_int(*ps, bp + "/identities/pair_samples", ctx, 64)));
        }
        rc.payload = std::move(cmd);
    } else if (command == "lattice") {
        LatticeCommand cmd;
        check_keys(*block, bp, ctx, {"c", "membership"});
        auto parse_ivec3 = [&](const json& v, const std::string& p) {
            IVec3 out{};
            if (!v.is_array() || v.size() != 3) {
                ctx.fail(p, "expected an integer 3-vector");
                return out;
            }
            for (int i = 0; i < 3; ++i) out[i] = parse_int(v[i], p + "/" + std::to_string(i), ctx);
            return out;
        };
        if (const json* c = get_member(*block, bp, ctx, "c", true)) cmd.c = parse_ivec3(*c, bp + "/c");
        if (const json* m = get_member(*block, bp, ctx, "membership", false)) {
            if (!m->is_array()) {
                ctx.fail(bp + "/membership", "expected an array of integer 3-vectors");
            } else {
                for (std::size_t i = 0; i < m->size(); ++i)
                    cmd.membership_queries.push_back(
                        parse_ivec3((*m)[i], bp + "/membership/" + std::to_string(i)));
            }
        }
        rc.payload = std::move(cmd);
    } else if (command == "nilpotent") {
        NilpotentCommand cmd;
        check_keys(*block, bp, ctx, {"matrix", "pair_with"});
        auto parse_square = [&](const json& v, const std::string& p, std::size_t& dim, Mat3& m3,
                                Mat2& m2) {
            if (!v.is_array() || (v.size() != 2 && v.size() != 3)) {
                ctx.fail(p, "expected a 2x2 or 3x3 matrix");
                return;
            }
            dim = v.size();
            for (std::size_t i = 0; i < dim; ++i) {
                if (!v[i].is_array() || v[i].size() != dim) {
                    ctx.fail(p + "/" + std::to_string(i), "row size mismatch");
                    return;
                }
                for (std::size_t c = 0; c < dim; ++c) {
                    const double val =
                        parse_real(v[i][c], p + "/" + std::to_string(i) + "/" + std::to_string(c), ctx);
                    if (dim == 3)
                        m3(i, c) = val;
                    else
                        m2(i, c) = val;
                }
            }
        };
        if (const json* m = get_member(*block, bp, ctx, "matrix", true))
            parse_square(*m, bp + "/matrix", cmd.dim, cmd.matrix3, cmd.matrix2);
        if (const json* pw = get_member(*block, bp, ctx, "pair_with", false)) {
            std::size_t d2 = 3;
            Mat3 m3;
            Mat2 m2;
            parse_square(*pw, bp + "/pair_with", d2, m3, m2);
            if (d2 != 3 || cmd.dim != 3)
                ctx.fail(bp + "/pair_with", "pair classification is defined for 3x3 matrices");
            cmd.pair_with = m3;
        }
        rc.payload = std::move(cmd);
    } else if (command == "conjugate") {
        ConjugateCommand cmd;
        check_keys(*block, bp, ctx,
                   {"map", "xi", "alpha", "grid", "ode_step", "tolerances", "verify_refine",
                    "emit_psi"});
        if (const json* m = get_member(*block, bp, ctx, "map", true))
            cmd.map = parse_map2(*m, bp + "/map", ctx);
        if (const json* x = get_member(*block, bp, ctx, "xi", true)) {
            check_keys(*x, bp + "/xi", ctx, {"p", "periodic"});
            if (const json* p = get_member(*x, bp + "/xi", ctx, "p", true)) {
                if (!p->is_array() || p->size() != 2) {
                    ctx.fail(bp + "/xi/p", "expected [p1, p2]");
                } else {
                    cmd.p[0] = parse_int((*p)[0], bp + "/xi/p/0", ctx, 1);
                    cmd.p[1] = parse_int((*p)[1], bp + "/xi/p/1", ctx, 0);
                }
            }
            if (const json* per = get_member(*x, bp + "/xi", ctx, "periodic", false))
                cmd.xi_periodic = parse_torus2(*per, bp + "/xi/periodic", ctx);
        }
        if (const json* a = get_member(*block, bp, ctx, "alpha", true))
            cmd.alpha = parse_real(*a, bp + "/alpha", ctx);
        if (const json* g = get_member(*block, bp, ctx, "grid", false)) {
            check_keys(*g, bp + "/grid", ctx, {"s", "t"});
            if (const json* s = get_member(*g, bp + "/grid", ctx, "s", false))
                cmd.cfg.grid_s =
                    static_cast<std::size_t>(std::max<long long>(4, parse_int(*s, bp + "/grid/s", ctx, 64)));
            if (const json* t = get_member(*g, bp + "/grid", ctx, "t", false))
                cmd.cfg.grid_t =
                    static_cast<std::size_t>(std::max<long long>(4, parse_int(*t, bp + "/grid/t", ctx, 64)));
        }
        if (const json* h = get_member(*block, bp, ctx, "ode_step", false)) {
            cmd.cfg.ode_step = parse_real(*h, bp + "/ode_step", ctx, 1e-3);
            if (!(cmd.cfg.ode_step > 0.0 && cmd.cfg.ode_step <= 0.1))
                ctx.fail(bp + "/ode_step", "must be in (0, 0.1]");
        }
        if (const json* t = get_member(*block, bp, ctx, "tolerances", false)) {
            check_keys(*t, bp + "/tolerances", ctx, {"hypothesis", "tau", "event", "residual_accept"});
            if (const json* v = get_member(*t, bp + "/tolerances", ctx, "hypothesis", false))
                cmd.cfg.hypothesis_tol = parse_real(*v, bp + "/tolerances/hypothesis", ctx, 1e-8);
            if (const json* v = get_member(*t, bp + "/tolerances", ctx, "tau", false))
                cmd.cfg.tau_tol = parse_real(*v, bp + "/tolerances/tau", ctx, 1e-6);
            if (const json* v = get_member(*t, bp + "/tolerances", ctx, "event", false))
                cmd.cfg.event_tol = parse_real(*v, bp + "/tolerances/event", ctx, 1e-6);
            if (const json* v = get_member(*t, bp + "/tolerances", ctx, "residual_accept", false))
                cmd.residual_accept = parse_real(*v, bp + "/tolerances/residual_accept", ctx, 1e-4);
        }
        if (const json* r = get_member(*block, bp, ctx, "verify_refine", false))
            cmd.verify_refine = static_cast<std::size_t>(
                std::max<long long>(1, parse_int(*r, bp + "/verify_refine", ctx, 2)));
        if (const json* e = get_member(*block, bp, ctx, "emit_psi", false)) {
            if (e->is_boolean())
                cmd.emit_psi = e->get<bool>();
            else
                ctx.fail(bp + "/emit_psi", "expected a boolean");
        }
        rc.payload = std::move(cmd);
    } else if (command == "random-growth") {
        RandomGrowthCommand cmd;
        check_keys(*block, bp, ctx, {"base_theta", "alpha", "phi", "samples", "n"});
        nlohmann::json sub = nlohmann::json::object();
        for (const char* key : {"base_theta", "alpha", "phi"})
            if (block->contains(key)) sub[key] = (*block)[key];
        cmd.spec = parse_random_anzai(sub, bp, ctx);
        if (const json* s = get_member(*block, bp, ctx, "samples", true)) {
            cmd.samples = static_cast<int>(parse_int(*s, bp + "/samples", ctx, 1));
            if (cmd.samples < 1) ctx.fail(bp + "/samples", "must be >= 1");
        }
        if (const json* n = get_member(*block, bp, ctx, "n", true)) {
            cmd.n = parse_int(*n, bp + "/n", ctx, 1);
            if (cmd.n < 1) ctx.fail(bp + "/n", "must be >= 1");
        }
        rc.payload = std::move(cmd);
    } else if (command == "drift") {
        DriftCommand cmd;
        check_keys(*block, bp, ctx, {"a", "roof", "beta", "alpha", "grid", "n_values"});
        if (const json* a = get_member(*block, bp, ctx, "a", true))
            cmd.a = parse_real(*a, bp + "/a", ctx);
        if (const json* r = get_member(*block, bp, ctx, "roof", true))
            cmd.roof_periodic = parse_circle(*r, bp + "/roof", ctx);
        if (const json* b = get_member(*block, bp, ctx, "beta", true))
            cmd.beta = parse_circle(*b, bp + "/beta", ctx);
        if (const json* a = get_member(*block, bp, ctx, "alpha", true))
            cmd.alpha = parse_real(*a, bp + "/alpha", ctx);
        if (const json* g = get_member(*block, bp, ctx, "grid", false)) {
            check_keys(*g, bp + "/grid", ctx, {"x1", "x2"});
            if (const json* v = get_member(*g, bp + "/grid", ctx, "x1", false))
                cmd.grid_x1 = static_cast<std::size_t>(
                    std::max<long long>(1, parse_int(*v, bp + "/grid/x1", ctx, 128)));
            if (const json* v = get_member(*g, bp + "/grid", ctx, "x2", false))
                cmd.grid_x2 = static_cast<std::size_t>(
                    std::max<long long>(1, parse_int(*v, bp + "/grid/x2", ctx, 8)));
        }
        if (const json* n = get_member(*block, bp, ctx, "n_values", true)) {
            if (!n->is_array() || n->empty()) {
                ctx.fail(bp + "/n_values", "expected a non-empty array");
            } else {
                for (std::size_t i = 0; i < n->size(); ++i) {
                    const long long v = parse_int((*n)[i], bp + "/n_values/" + std::to_string(i), ctx, 1);
                    if (v < 1)
                        ctx.fail(bp + "/n_values/" + std::to_string(i), "must be >= 1");
                    else
                        cmd.n_values.push_back(v);
                }
            }
        }
        rc.payload = std::move(cmd);
    }

    if (!ctx.issues.empty()) throw SchemaError(ctx.issues);
    return rc;
}

}  // namespace torogrow
