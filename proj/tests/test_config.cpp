// test_config.cpp — strict scenario config parsing and serialization round trip
#include <catch2/catch_amalgamated.hpp>

#include "duobath/config.hpp"

using namespace duobath;
using nlohmann::json;

TEST_CASE("defaults parse from an empty object", "[config]") {
    const auto cfg = parse_config(json::object());
    CHECK(cfg.system.h == 0.1);
    CHECK(cfg.system.delta == 1e-3);
    CHECK(cfg.x12 == 1.0);
    CHECK(cfg.reservoir_a.s == 1.0);
    CHECK(cfg.reservoir_a.j == 1e-4);
    CHECK(cfg.reservoir_b.lambda == 10.0);
    CHECK(cfg.mode == RunMode::nonstationary);
    CHECK(cfg.time.n_points == 500);
    CHECK(cfg.tolerance == 1e-8);
    CHECK(cfg.output.format == "csv");
    CHECK_FALSE(cfg.scan.has_value());
    CHECK_FALSE(cfg.correlation.has_value());
}

TEST_CASE("full config parses field by field", "[config]") {
    const json root = {
        {"system", {{"h", 0.2}, {"delta", 2e-3}, {"omega", 3.0}, {"x12", 0.8}}},
        {"reservoir_a", {{"s", 0.5}, {"j", 1e-5}, {"lambda", 20.0}}},
        {"reservoir_b", {{"s", 1.5}}},
        {"mode", "stationary"},
        {"time", {{"t_max", 1e5}, {"n_points", 100}}},
        {"scan", {{"z_min", 0.0}, {"z_max", 1.0}, {"n_z", 6}}},
        {"correlation", {{"t_star", 1e4}, {"t_max", 2e5}, {"n_points", 50}}},
        {"tolerance", 1e-7},
        {"output", {{"path", "out.csv"}, {"format", "json"}}},
    };
    const auto cfg = parse_config(root);
    CHECK(cfg.system.h == 0.2);
    CHECK(cfg.system.omega0 == 3.0);
    CHECK(cfg.x12 == 0.8);
    CHECK(cfg.reservoir_a.s == 0.5);
    CHECK(cfg.reservoir_b.s == 1.5);
    CHECK(cfg.reservoir_b.j == 1e-4); // untouched default
    CHECK(cfg.mode == RunMode::stationary);
    CHECK(cfg.time.t_max == 1e5);
    REQUIRE(cfg.scan.has_value());
    CHECK(cfg.scan->n_z == 6);
    REQUIRE(cfg.correlation.has_value());
    CHECK(cfg.correlation->t_star == 1e4);
    CHECK(cfg.tolerance == 1e-7);
    CHECK(cfg.output.format == "json");
}

TEST_CASE("unknown keys are rejected with field paths", "[config]") {
    auto expect_path = [](const json& root, const std::string& path) {
        try {
            parse_config(root);
            FAIL("expected ConfigError for " << path);
        } catch (const ConfigError& e) {
            CHECK(e.field_path == path);
        }
    };
    expect_path({{"bogus", 1}}, "bogus");
    expect_path({{"system", {{"hbar", 1.0}}}}, "system.hbar");
    expect_path({{"reservoir_a", {{"cutoff", 10.0}}}}, "reservoir_a.cutoff");
    expect_path({{"scan", {{"zmax", 1.0}}}}, "scan.zmax");
    expect_path({{"time", {{"dt", 0.1}}}}, "time.dt");
    expect_path({{"output", {{"file", "x"}}}}, "output.file");
}

TEST_CASE("type and domain violations carry field paths", "[config]") {
    auto expect_path = [](const json& root, const std::string& path) {
        try {
            parse_config(root);
            FAIL("expected ConfigError for " << path);
        } catch (const ConfigError& e) {
            CHECK(e.field_path == path);
        }
    };
    expect_path({{"system", {{"h", "big"}}}}, "system.h");
    expect_path({{"mode", "hybrid"}}, "mode");
    expect_path({{"tolerance", 1e-2}}, "tolerance");
    expect_path({{"time", {{"n_points", 1}}}}, "time.n_points");
    expect_path({{"scan", {{"z_max", 2.5}}}}, "scan.z_max");
    expect_path({{"output", {{"format", "xml"}}}}, "output.format");
    expect_path({{"system", {{"h", -0.1}}}}, "system");
    expect_path({{"reservoir_a", {{"s", -1.0}}}}, "reservoir_a");
    expect_path({{"time", {{"n_points", -5}}}}, "time.n_points");
}

TEST_CASE("serialization round trip preserves the effective config", "[config]") {
    const json root = {
        {"system", {{"h", 0.15}, {"delta", 5e-4}}},
        {"reservoir_a", {{"s", 0.7}, {"j", 3e-5}}},
        {"mode", "nonstationary"},
        {"time", {{"t_max", 2e5}, {"n_points", 321}}},
        {"scan", {{"z_min", 0.2}, {"z_max", 0.8}, {"n_z", 4}}},
        {"tolerance", 5e-9},
    };
    const auto cfg = parse_config(root);
    const auto cfg2 = parse_config(config_to_json(cfg));
    CHECK(cfg2.system.h == cfg.system.h);
    CHECK(cfg2.system.delta == cfg.system.delta);
    CHECK(cfg2.system.omega0 == cfg.system.omega0);
    CHECK(cfg2.x12 == cfg.x12);
    CHECK(cfg2.reservoir_a.s == cfg.reservoir_a.s);
    CHECK(cfg2.reservoir_a.j == cfg.reservoir_a.j);
    CHECK(cfg2.reservoir_b.s == cfg.reservoir_b.s);
    CHECK(cfg2.mode == cfg.mode);
    CHECK(cfg2.time.t_max == cfg.time.t_max);
    CHECK(cfg2.time.n_points == cfg.time.n_points);
    REQUIRE(cfg2.scan.has_value());
    CHECK(cfg2.scan->z_min == cfg.scan->z_min);
    CHECK(cfg2.scan->n_z == cfg.scan->n_z);
    CHECK(cfg2.tolerance == cfg.tolerance);
}
