#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>

#include "feedersim/errors.hpp"
#include "feedersim/model.hpp"

using namespace feedersim;

namespace {

ScenarioSpec small_spec() {
    ScenarioSpec s;
    s.node_count = 10;
    s.spacing_min_km = 0.2;
    s.spacing_max_km = 0.3;
    s.r_per_km = 0.33;
    s.x_per_km = 0.38;
    s.v0_volts = 7200.0;
    s.p_c_max_w = 2500.0;
    s.q_c_ratio_min = 0.2;
    s.q_c_ratio_max = 0.3;
    s.penetration = 0.2;
    s.p_g_w = 1000.0;
    s.s_va = 2200.0;
    s.topology_seed = 42;
    s.load_seed = 43;
    return s;
}

std::string serialized(const Feeder& f) {
    std::ostringstream out;
    write_feeder(out, f);
    return out.str();
}

} // namespace

TEST_CASE("case_spec parameterizations") {
    for (int id = 1; id <= 4; ++id) {
        const ScenarioSpec s = case_spec(id);
        CHECK(s.node_count == 250);
        CHECK(s.spacing_min_km == 0.2);
        CHECK(s.spacing_max_km == 0.3);
        CHECK(s.r_per_km == 0.33);
        CHECK(s.x_per_km == 0.38);
        CHECK(s.v0_volts == 7200.0);
        CHECK(s.q_c_ratio_min == 0.2);
        CHECK(s.q_c_ratio_max == 0.3);
        CHECK(s.s_va == 2200.0);
    }
    CHECK(case_spec(1).penetration == 0.20);
    CHECK(case_spec(1).p_c_max_w == 2500.0);
    CHECK(case_spec(1).p_g_w == 1000.0);
    CHECK(case_spec(2).penetration == 0.20);
    CHECK(case_spec(2).p_c_max_w == 1000.0);
    CHECK(case_spec(2).p_g_w == 2000.0);
    CHECK(case_spec(3).penetration == 0.50);
    CHECK(case_spec(3).p_c_max_w == 2500.0);
    CHECK(case_spec(3).p_g_w == 1000.0);
    CHECK(case_spec(4).penetration == 0.50);
    CHECK(case_spec(4).p_c_max_w == 1000.0);
    CHECK(case_spec(4).p_g_w == 2000.0);
    // inverter headroom ratios of the two regimes
    CHECK(case_spec(1).s_va / case_spec(1).p_g_w == doctest::Approx(2.2));
    CHECK(case_spec(4).s_va / case_spec(4).p_g_w == doctest::Approx(1.1));
    CHECK_THROWS_AS(case_spec(0), ValidationError);
    CHECK_THROWS_AS(case_spec(5), ValidationError);
}

TEST_CASE("build_topology ranges and determinism") {
    ScenarioSpec s = case_spec(1);
    s.topology_seed = 7;
    const Feeder f = build_topology(s);
    REQUIRE(f.size() == 250);
    REQUIRE(f.lines.size() == 250);
    for (const auto& l : f.lines) {
        CHECK(l.length_km >= 0.2);
        CHECK(l.length_km <= 0.3);
        CHECK(l.r_ohm == 0.33 * l.length_km);
        CHECK(l.x_ohm == 0.38 * l.length_km);
        CHECK(l.r_ohm >= 0.33 * 0.2);
        CHECK(l.r_ohm <= 0.33 * 0.3);
    }
    for (const auto& n : f.nodes) {
        CHECK(n.p_c_w == 0.0);
        CHECK(n.q_c_var == 0.0);
        CHECK(n.s_va == 0.0);
    }

    const Feeder again = build_topology(s);
    CHECK(serialized(f) == serialized(again));

    s.load_seed = 99;
    CHECK(serialized(generate_feeder(s)) == serialized(generate_feeder(s)));
}

TEST_CASE("degenerate spacing gives exact impedances") {
    ScenarioSpec s = small_spec();
    s.node_count = 1;
    s.spacing_min_km = 1.0;
    s.spacing_max_km = 1.0;
    const Feeder f = build_topology(s);
    REQUIRE(f.size() == 1);
    CHECK(f.lines[0].length_km == 1.0);
    CHECK(f.lines[0].r_ohm == 0.33);
    CHECK(f.lines[0].x_ohm == 0.38);
}

TEST_CASE("invalid specs are rejected with named errors") {
    ScenarioSpec s = small_spec();
    s.spacing_min_km = 0.4; // > max
    CHECK_THROWS_WITH_AS(build_topology(s),
                         "spec.spacing_min: must be <= spacing_max", ValidationError);

    s = small_spec();
    s.penetration = 1.5;
    CHECK_THROWS_AS(build_topology(s), ValidationError);

    s = small_spec();
    s.node_count = 0;
    CHECK_THROWS_AS(build_topology(s), ValidationError);

    s = small_spec();
    s.p_g_w = 3000.0; // > s_va
    CHECK_THROWS_AS(populate_loads_and_pv(build_topology(small_spec()), s),
                    ValidationError);
}

TEST_CASE("populate draws loads in range and places the exact PV count") {
    ScenarioSpec s = case_spec(1);
    s.topology_seed = 3;
    s.load_seed = 11;
    const Feeder topo = build_topology(s);
    const Feeder f = populate_loads_and_pv(topo, s);

    std::size_t pv = 0;
    for (const auto& n : f.nodes) {
        CHECK(n.p_c_w >= 0.0);
        CHECK(n.p_c_w <= 2500.0);
        if (n.p_c_w > 0.0) {
            const double ratio = n.q_c_var / n.p_c_w;
            CHECK(ratio >= 0.2);
            CHECK(ratio <= 0.3);
        }
        if (n.s_va > 0.0) {
            ++pv;
            CHECK(n.p_g_w == 1000.0);
            CHECK(n.s_va == 2200.0);
        } else {
            CHECK(n.p_g_w == 0.0);
        }
    }
    CHECK(pv == 50); // round(0.2 * 250)
}

TEST_CASE("sampled quantities stay in range and pv count is exact, many seeds") {
    std::mt19937_64 seeds(1234);
    for (int trial = 0; trial < 40; ++trial) {
        ScenarioSpec s = small_spec();
        s.node_count = 1 + static_cast<int>(seeds() % 200);
        s.penetration = static_cast<double>(seeds() % 101) / 100.0;
        s.topology_seed = seeds();
        s.load_seed = seeds();
        const Feeder f = populate_loads_and_pv(build_topology(s), s);
        const auto expected = static_cast<std::size_t>(
            std::llround(s.penetration * static_cast<double>(s.node_count)));
        std::size_t pv = 0;
        for (const auto& n : f.nodes) {
            if (n.s_va > 0.0) ++pv;
            CHECK(n.p_c_w >= 0.0);
            CHECK(n.p_c_w <= s.p_c_max_w);
            CHECK(n.q_c_var >= s.q_c_ratio_min * n.p_c_w);
            CHECK(n.q_c_var <= s.q_c_ratio_max * n.p_c_w);
        }
        for (const auto& l : f.lines) {
            CHECK(l.length_km >= s.spacing_min_km);
            CHECK(l.length_km <= s.spacing_max_km);
        }
        CHECK(pv == expected);
    }
}

TEST_CASE("zero penetration leaves every node without pv") {
    ScenarioSpec s = small_spec();
    s.penetration = 0.0;
    const Feeder f = populate_loads_and_pv(build_topology(s), s);
    for (const auto& n : f.nodes) {
        CHECK(n.s_va == 0.0);
        CHECK(n.p_g_w == 0.0);
    }
}

TEST_CASE("sample mean of consumption sits near p_c_max / 2") {
    ScenarioSpec s = case_spec(1);
    s.load_seed = 2024;
    const Feeder f = populate_loads_and_pv(build_topology(s), s);
    double sum = 0.0;
    for (const auto& n : f.nodes) sum += n.p_c_w;
    const double mean = sum / 250.0;
    // three standard errors of the mean of U(0, 2500) over 250 nodes
    const double se = 2500.0 / std::sqrt(12.0) / std::sqrt(250.0);
    CHECK(std::abs(mean - 1250.0) < 3.0 * se);
}

TEST_CASE("changing the load seed never perturbs the topology") {
    ScenarioSpec s = case_spec(2);
    s.topology_seed = 77;
    const Feeder topo = build_topology(s);
    s.load_seed = 1;
    const Feeder a = populate_loads_and_pv(topo, s);
    s.load_seed = 2;
    const Feeder b = populate_loads_and_pv(topo, s);
    REQUIRE(a.lines.size() == b.lines.size());
    for (std::size_t j = 0; j < a.lines.size(); ++j) {
        CHECK(a.lines[j].length_km == b.lines[j].length_km);
        CHECK(a.lines[j].r_ohm == b.lines[j].r_ohm);
        CHECK(a.lines[j].x_ohm == b.lines[j].x_ohm);
    }
}

TEST_CASE("feeder serialization round-trips bit-for-bit") {
    ScenarioSpec s = case_spec(3);
    s.topology_seed = 5;
    s.load_seed = 6;
    Feeder f = generate_feeder(s);
    f.case_tag = "3";

    const std::string text = serialized(f);
    std::istringstream in(text);
    const Feeder back = read_feeder(in);
    CHECK(serialized(back) == text);
    CHECK(back.v0_volts == f.v0_volts);
    CHECK(back.topology_seed == 5);
    CHECK(back.load_seed == 6);
    CHECK(back.case_tag == "3");
    REQUIRE(back.size() == f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(back.nodes[i].p_c_w == f.nodes[i].p_c_w);
        CHECK(back.nodes[i].q_c_var == f.nodes[i].q_c_var);
        CHECK(back.nodes[i].p_g_w == f.nodes[i].p_g_w);
        CHECK(back.nodes[i].s_va == f.nodes[i].s_va);
        CHECK(back.lines[i].length_km == f.lines[i].length_km);
    }
}

TEST_CASE("malformed feeder files are rejected") {
    std::istringstream bad_magic("not-a-feeder v1\n");
    CHECK_THROWS_AS(read_feeder(bad_magic), IoError);

    std::istringstream bad_version("feedersim-feeder v9\n");
    CHECK_THROWS_AS(read_feeder(bad_version), IoError);

    // row index out of order
    std::istringstream rows(
        "feedersim-feeder v1\n"
        "v0_volts 1000\ntopology_seed 0\nload_seed 0\ncase custom\nnodes 2\n"
        "index length_km r_ohm x_ohm p_c_w q_c_var p_g_w s_va\n"
        "1 1 1 1 0 0 0 0\n"
        "3 1 1 1 0 0 0 0\n");
    CHECK_THROWS_AS(read_feeder(rows), IoError);
}

TEST_CASE("feeder structural validation") {
    Feeder f;
    f.v0_volts = 1000.0;
    f.nodes.resize(2);
    f.lines.resize(1, LineSegment{1.0, 0.5, 0.5}); // mismatched counts
    CHECK_THROWS_AS(f.validate(), ValidationError);

    f.lines.resize(2, LineSegment{1.0, 0.5, 0.5});
    CHECK_NOTHROW(f.validate());

    f.nodes[1].p_g_w = 10.0; // p_g > s = 0
    CHECK_THROWS_AS(f.validate(), ValidationError);
}

TEST_CASE("format_double round-trips exactly") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 2000; ++i) {
        const double x = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 1e7 - 5e6;
        const std::string s = format_double(x);
        CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(0.33) == "0.33");
    CHECK(format_double(7200.0) == "7200");
}
