#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include "torogrow/config.hpp"

using namespace torogrow;
using nlohmann::json;

namespace {

json minimal_growth() {
    return json::parse(R"({
      "schema": "torogrow/1",
      "command": "growth",
      "growth": {
        "system": {"type": "anzai", "alpha": "sqrt2m1",
                   "phi": {"degree": 1, "sin": [0.1]}},
        "grid": {"dims": [8, 8]},
        "n_schedule": [16, 32, 64]
      }
    })");
}

}  // namespace

TEST_CASE("minimal growth config parses") {
    const auto rc = parse_config(minimal_growth());
    CHECK(rc.command == "growth");
    const auto& cmd = std::get<GrowthCommand>(rc.payload);
    CHECK(cmd.grid_dims == std::vector<std::size_t>{8, 8});
    CHECK(cmd.n_schedule == std::vector<long long>{16, 32, 64});
    const auto* a = std::get_if<AnzaiSpec>(&cmd.system);
    REQUIRE(a != nullptr);
    CHECK(a->alpha == Catch::Approx(0.41421356237309515));
    CHECK(a->phi.degree == 1);
}

TEST_CASE("schema version and unknown keys are enforced") {
    json j = minimal_growth();
    j["schema"] = "torogrow/0";
    CHECK_THROWS_AS(parse_config(j), SchemaError);

    j = minimal_growth();
    j["growth"]["system"]["typo"] = 1;
    try {
        parse_config(j);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        REQUIRE(e.issues().size() == 1);
        CHECK(e.issues()[0].find("/growth/system/typo") != std::string::npos);
        CHECK(e.issues()[0].find("unknown key") != std::string::npos);
    }

    j = minimal_growth();
    j.erase("schema");
    CHECK_THROWS_AS(parse_config(j), SchemaError);
}

TEST_CASE("irrational tokens and bad values") {
    json j = minimal_growth();
    j["growth"]["system"]["alpha"] = "golden";
    const auto rc = parse_config(j);
    const auto& cmd = std::get<GrowthCommand>(rc.payload);
    CHECK(std::get<AnzaiSpec>(cmd.system).alpha == Catch::Approx(0.6180339887498949));

    j["growth"]["system"]["alpha"] = "tau";  // not a token
    CHECK_THROWS_AS(parse_config(j), SchemaError);

    j = minimal_growth();
    j["growth"]["n_schedule"] = json{{"geometric", {{"from", 16}, {"to", 256}}}};
    const auto rc2 = parse_config(j);
    CHECK(std::get<GrowthCommand>(rc2.payload).n_schedule ==
          std::vector<long long>{16, 32, 64, 128, 256});
}

TEST_CASE("command blocks must match the command") {
    json j = minimal_growth();
    j["command"] = "lattice";
    j["lattice"] = {{"c", {6, 10, 15}}};
    CHECK_THROWS_AS(parse_config(j), SchemaError);  // stray growth block

    j.erase("growth");
    const auto rc = parse_config(j);
    const auto& cmd = std::get<LatticeCommand>(rc.payload);
    CHECK(cmd.c == IVec3{6, 10, 15});
}

TEST_CASE("conjugate config builds a composite map") {
    const json j = json::parse(R"({
      "schema": "torogrow/1",
      "command": "conjugate",
      "conjugate": {
        "map": {"chain": [
          {"type": "shear", "axis": 0, "g": {"sin": [0.0795774715459477]}},
          {"type": "skew", "alpha": "sqrt2m1", "phi": {"const": 0.05, "sin": [0.159154943091895]}},
          {"type": "shear", "axis": 0, "g": {"sin": [-0.0795774715459477]}}
        ]},
        "xi": {"p": [1, 0], "periodic": {"terms": [{"k": [0, 1], "sin": 0.0795774715459477}]}},
        "alpha": "sqrt2m1",
        "grid": {"s": 32, "t": 32},
        "ode_step": 0.002
      }
    })");
    const auto rc = parse_config(j);
    const auto& cmd = std::get<ConjugateCommand>(rc.payload);
    REQUIRE(cmd.map != nullptr);
    CHECK(cmd.cfg.grid_s == 32);
    CHECK(cmd.cfg.ode_step == Catch::Approx(0.002));
    CHECK(cmd.p == std::array<long long, 2>{1, 0});
}

TEST_CASE("random growth and drift configs parse") {
    const json j = json::parse(R"({
      "schema": "torogrow/1",
      "command": "random-growth",
      "seed": 7,
      "random-growth": {
        "base_theta": "golden",
        "alpha": "sqrt2m1",
        "phi": {"x_degree": 1, "sin": [{"cos": [0.159154943091895]}]},
        "samples": 100,
        "n": 100
      }
    })");
    const auto rc = parse_config(j);
    CHECK(rc.seed == 7);
    const auto& cmd = std::get<RandomGrowthCommand>(rc.payload);
    CHECK(cmd.samples == 100);
    CHECK(cmd.spec.x_degree == 1);
    REQUIRE(cmd.spec.sin_k.size() == 1);

    const json d = json::parse(R"({
      "schema": "torogrow/1",
      "command": "drift",
      "drift": {
        "a": "sqrt2m1",
        "roof": {"cos": [0.5]},
        "beta": {"sin": [0.159154943091895]},
        "alpha": "sqrt2m1",
        "n_values": [100, 1000]
      }
    })");
    const auto rcd = parse_config(d);
    const auto& cd = std::get<DriftCommand>(rcd.payload);
    CHECK(cd.n_values == std::vector<long long>{100, 1000});
}

TEST_CASE("multiple violations are all reported with pointer paths") {
    json j = minimal_growth();
    j["growth"]["system"]["alpha"] = "bogus";
    j["growth"]["grid"]["dims"] = {0};
    j["extra"] = 1;
    try {
        parse_config(j);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.issues().size() >= 3);
        bool saw_alpha = false, saw_dims = false, saw_extra = false;
        for (const auto& issue : e.issues()) {
            saw_alpha |= issue.find("/growth/system/alpha") != std::string::npos;
            saw_dims |= issue.find("/growth/grid/dims") != std::string::npos;
            saw_extra |= issue.find("/extra") != std::string::npos;
        }
        CHECK(saw_alpha);
        CHECK(saw_dims);
        CHECK(saw_extra);
    }
}
