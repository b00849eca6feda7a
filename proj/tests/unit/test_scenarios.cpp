#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mmst/errors.hpp"
#include "mmst/scenarios.hpp"

using namespace mmst;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("mmst_test_" + name);
    fs::remove_all(p);
    return p;
}

const char* kTiny = R"(
[cavity]
modes = 30
centered = true
grid_points = 401

[tls]
positions = pi

[mmst]
trajectories = 24
propagator = modes

[run]
name = tiny
t_final = 0.3
output_interval = 0.05
snapshot_times = 0.1, 0.2
quantum = true
fit_window = 0.05, 0.25
)";

}  // namespace

TEST_SUITE("scenarios") {

TEST_CASE("value expressions") {
    CHECK(parse_value("0.5", 100.0, 2.0 * kPi) == 0.5);
    CHECK(parse_value("pi/3", 100.0, 2.0 * kPi) == doctest::Approx(kPi / 3.0));
    CHECK(parse_value("2*pi", 100.0, 2.0 * kPi) == doctest::Approx(2.0 * kPi));
    CHECK(parse_value("1.2pi", 100.0, 2.0 * kPi) == doctest::Approx(1.2 * kPi));
    CHECK(parse_value("lambda/4", 100.0, 2.0 * kPi) == doctest::Approx(2.0 * kPi / 100.0 / 4.0));
    CHECK(parse_value("L/2", 100.0, 3.0) == doctest::Approx(1.5));
    CHECK(parse_value("-pi", 100.0, 2.0 * kPi) == doctest::Approx(-kPi));
    CHECK_THROWS_AS(parse_value("pie", 100.0, 1.0), ConfigError);
    CHECK_THROWS_AS(parse_value("1/0", 100.0, 1.0), ConfigError);
    CHECK_THROWS_AS(parse_value("", 100.0, 1.0), ConfigError);
}

TEST_CASE("config defaults and overrides") {
    const auto s = parse_config_text("[run]\nt_final = pi\n");
    REQUIRE(s.variants.size() == 1);
    const auto& v = s.variants[0];
    CHECK(v.config.mode_count == 400);
    CHECK(v.config.grid_points == 5001);
    CHECK(v.config.dt() == doctest::Approx(v.config.dx() / 2.0));
    CHECK(v.sampling.gamma == doctest::Approx(0.45));
    CHECK(v.config.initially_excited == std::vector<bool>{true});

    const auto t = parse_config_text("[cavity]\ndt_divisor = 10\n[mmst]\ngamma = 0.5\nsampling = photonic\n");
    CHECK(t.variants[0].config.dt() == doctest::Approx(t.variants[0].config.dx() / 10.0));
    CHECK(t.variants[0].config.gamma == 0.5);
    CHECK(t.variants[0].sampling.gamma == 0.5);
    CHECK_FALSE(t.variants[0].sampling.electronic);

    const auto chain = parse_config_text("[tls]\ncount = 3\nspacing = lambda/4\nexcited = all\n");
    const auto& p = chain.variants[0].config.positions;
    REQUIRE(p.size() == 3);
    CHECK(p[1] == doctest::Approx(kPi));
    CHECK(p[2] - p[1] == doctest::Approx(kPi / 200.0));
    CHECK(chain.variants[0].config.excited_count() == 3);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config_text("[cavity]\nmodez = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[spam]\na = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[tls]\npositions = 7.0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[tls]\npositions = 1, 2\nexcited = true\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[tls]\ncount = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[cavity]\ndt_divisor = 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[mmst]\npropagator = rk4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[run]\nt_final = 1\nsnapshot_times = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(fs::path("/nonexistent/x.ini")), ConfigError);
}

TEST_CASE("catalog") {
    for (const auto& n : scenario_names()) {
        const auto s = catalog_scenario(n);
        CHECK_FALSE(s.variants.empty());
        for (const auto& v : s.variants) CHECK_NOTHROW(v.config.validate());
    }
    CHECK(catalog_scenario("fig2").variants.size() == 3);
    CHECK(catalog_scenario("fig8").variants[0].config.tls_count() == 101);
    const auto b = catalog_scenario("fig8b");
    REQUIRE(b.variants.size() == 1);
    CHECK(b.variants[0].label.empty());
    CHECK(b.variants[0].config.positions[1] - b.variants[0].config.positions[0] == doctest::Approx(kPi / 200.0));
    CHECK_THROWS_AS(catalog_scenario("fig99"), ConfigError);
}

TEST_CASE("desk scale") {
    auto s = catalog_scenario("fig4");
    apply_desk_scale(s);
    const auto& c = s.variants[0].config;
    CHECK(c.mode_count == 100);
    CHECK(c.first_mode == 151);
    CHECK(c.grid_points == 1001);
    CHECK(c.t_final <= 3.0 * kPi + 1e-12);
    auto a = catalog_scenario("figA1");
    apply_desk_scale(a);
    CHECK(a.variants[0].config.mode_count == 400);
    CHECK(a.variants[0].trajectories == a.variants[0].desk_trajectories);

    RunOverrides o;
    o.trajectories = 5;
    o.propagator = Propagator::modes;
    o.gamma = 0.3;
    apply_overrides(s, o);
    CHECK(s.variants[0].trajectories == 5);
    CHECK(s.variants[0].propagator == Propagator::modes);
    CHECK(s.variants[0].sampling.gamma == doctest::Approx(0.3));
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const auto a = canonical_description(catalog_scenario("fig4"));
    CHECK(a == canonical_description(catalog_scenario("fig4")));
    CHECK(a != canonical_description(catalog_scenario("fig5")));
}

TEST_CASE("a tiny run writes its outputs and reproduces them") {
    const auto s = parse_config_text(kTiny);
    const auto d1 = scratch("run1");
    const auto d2 = scratch("run2");
    RunOptions o;
    o.seed = 3;
    o.threads = 2;
    o.out_dir = d1;
    const auto r = run_scenario(s, o);
    REQUIRE(r.variants.size() == 1);
    CHECK(r.variants[0].completed == 24);
    CHECK_FALSE(r.config_hash.empty());
    for (const char* f : {"populations.csv", "populations_quantum.csv", "intensity.csv", "intensity_stderr.csv",
                          "intensity_quantum.csv", "fits.csv", "manifest.json"})
        CHECK_MESSAGE(fs::exists(d1 / f), f);
    const auto header = slurp(d1 / "populations.csv").substr(0, 18);
    CHECK(header == "t,rho_ee_1,stderr_");
    o.out_dir = d2;
    o.threads = 1;
    run_scenario(s, o);
    for (const char* f : {"populations.csv", "intensity.csv", "fits.csv"}) CHECK(slurp(d1 / f) == slurp(d2 / f));
    fs::remove_all(d1);
    fs::remove_all(d2);
}

}
