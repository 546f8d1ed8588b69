#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "feedersim/control.hpp"
#include "feedersim/errors.hpp"
#include "feedersim/model.hpp"

using namespace feedersim;

namespace {

constexpr double kAlpha = 0.33 / 0.38;

ControlConfig config(Scheme scheme, double k,
                     CoeffMode mode = CoeffMode::paper_literal) {
    ControlConfig cfg;
    cfg.scheme = scheme;
    cfg.k = k;
    cfg.coeff_mode = mode;
    cfg.alpha = kAlpha;
    return cfg;
}

LocalMeasurement random_measurement(std::mt19937_64& rng) {
    const auto u = [&rng](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    LocalMeasurement m;
    m.s_va = u(0.0, 3000.0);
    m.p_g_w = u(0.0, m.s_va);
    m.p_c_w = u(0.0, 3000.0);
    m.q_c_var = u(0.0, 1000.0);
    return m;
}

} // namespace

TEST_CASE("reactive capability bound") {
    CHECK(reactive_capability_var(2200.0, 2000.0) ==
          doctest::Approx(916.51513899116797).epsilon(1e-12));
    CHECK(reactive_capability_var(2200.0, 0.0) == 2200.0);
    CHECK(reactive_capability_var(2200.0, 2200.0) == 0.0);
    CHECK_THROWS_AS(reactive_capability_var(2200.0, 2300.0), ValidationError);
    CHECK_THROWS_AS(reactive_capability_var(-1.0, 0.0), ValidationError);
}

TEST_CASE("constr clamps symmetric range") {
    CHECK(constr(1.0, 2.0) == 1.0);
    CHECK(constr(3.0, 2.0) == 2.0);
    CHECK(constr(-3.0, 2.0) == -2.0);
    CHECK(constr(123.4, 0.0) == 0.0);
    CHECK(constr(-123.4, 0.0) == 0.0);
    CHECK_THROWS_AS(constr(1.0, -0.5), ValidationError);
}

TEST_CASE("loss law cancels local reactive consumption up to capability") {
    CHECK(control_loss({1000.0, 0.0, 300.0, 2200.0}) == 300.0);
    CHECK(control_loss({0.0, 0.0, 300.0, 0.0}) == 0.0); // no inverter
    CHECK(control_loss({2000.0, 0.0, 1000.0, 2200.0}) ==
          doctest::Approx(916.51513899116797).epsilon(1e-12));
}

TEST_CASE("voltage law follows the configured multiplier") {
    // reverse-flow node: the law saturates at consuming capability
    const LocalMeasurement m{2000.0, 500.0, 125.0, 2200.0};
    const double out = control_voltage(m, config(Scheme::voltage, 0.0));
    CHECK(out == doctest::Approx(-916.51513899116797).epsilon(1e-12));

    // balanced node is a no-op in both modes
    const LocalMeasurement balanced{800.0, 800.0, 0.0, 2200.0};
    CHECK(control_voltage(balanced, config(Scheme::voltage, 0.0)) == 0.0);
    CHECK(control_voltage(balanced,
                          config(Scheme::voltage, 0.0, CoeffMode::drop_nulling)) == 0.0);

    // the two modes differ by the factor alpha^2 when unconstrained
    const LocalMeasurement roomy{0.0, 100.0, 0.0, 1e9};
    const double lit = control_voltage(roomy, config(Scheme::voltage, 0.0));
    const double nul =
        control_voltage(roomy, config(Scheme::voltage, 0.0, CoeffMode::drop_nulling));
    CHECK(lit == doctest::Approx(100.0 / kAlpha));
    CHECK(nul == doctest::Approx(100.0 * kAlpha));
}

TEST_CASE("drop_nulling cancels the per-link drop when unconstrained") {
    std::mt19937_64 rng(4242);
    const auto u = [&rng](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    for (int trial = 0; trial < 200; ++trial) {
        LocalMeasurement m;
        m.s_va = 1e12; // effectively unbounded
        m.p_g_w = u(0.0, 3000.0);
        m.p_c_w = u(0.0, 3000.0);
        m.q_c_var = u(0.0, 900.0);
        const double q_g =
            control_voltage(m, config(Scheme::voltage, 0.0, CoeffMode::drop_nulling));
        const double r = 0.33, x = 0.38;
        const double drop = r * (m.p_c_w - m.p_g_w) + x * (m.q_c_var - q_g);
        CHECK(std::abs(drop) < 1e-9 * (1.0 + std::abs(m.p_c_w - m.p_g_w)));
    }
}

TEST_CASE("hybrid endpoints recover the pure laws exactly") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 2000; ++trial) {
        const LocalMeasurement m = random_measurement(rng);
        for (const CoeffMode mode : {CoeffMode::paper_literal, CoeffMode::drop_nulling}) {
            CHECK(control_hybrid(m, config(Scheme::hybrid, 1.0, mode)) ==
                  control_loss(m));
            CHECK(control_hybrid(m, config(Scheme::hybrid, 0.0, mode)) ==
                  control_voltage(m, config(Scheme::voltage, 0.0, mode)));
        }
    }
}

TEST_CASE("hybrid output is always inside the capability bound") {
    std::mt19937_64 rng(123);
    const auto u = [&rng](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    for (int trial = 0; trial < 5000; ++trial) {
        const LocalMeasurement m = random_measurement(rng);
        const double k = u(-5.0, 10.0);
        const double q_max = reactive_capability_var(m.s_va, m.p_g_w);
        CHECK(std::abs(control_hybrid(m, config(Scheme::hybrid, k))) <= q_max);
    }
}

TEST_CASE("zero-capability node yields zero for any K") {
    const LocalMeasurement m{0.0, 1500.0, 400.0, 0.0};
    for (double k : {-5.0, -1.0, 0.0, 0.5, 1.0, 4.0, 10.0}) {
        CHECK(control_hybrid(m, config(Scheme::hybrid, k)) == 0.0);
    }
}

TEST_CASE("apply_control vectorizes the laws over a feeder") {
    ScenarioSpec s = case_spec(1);
    s.topology_seed = 12;
    s.load_seed = 13;
    const Feeder f = generate_feeder(s);

    const Injection none = apply_control(f, config(Scheme::none, 0.0));
    for (double q : none.q_g_var) CHECK(q == 0.0);

    // K = 1 with ample headroom: the injection equals q_c at PV nodes
    // (q_c <= 0.3 * 2500 = 750 < q_max ~ 1960 always holds here)
    const Injection loss_inj = apply_control(f, config(Scheme::hybrid, 1.0));
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f.nodes[i].s_va > 0.0) {
            CHECK(loss_inj.q_g_var[i] == f.nodes[i].q_c_var);
        } else {
            CHECK(loss_inj.q_g_var[i] == 0.0);
        }
    }
}

TEST_CASE("identically configured nodes receive identical setpoints") {
    Feeder f;
    f.v0_volts = 7200.0;
    f.lines.assign(4, LineSegment{0.25, 0.0825, 0.095});
    f.nodes.assign(4, NodeState{1200.0, 300.0, 1000.0, 2200.0});
    for (double k : {-2.0, 0.3, 7.0}) {
        const Injection inj = apply_control(f, config(Scheme::hybrid, k));
        for (std::size_t i = 1; i < 4; ++i) CHECK(inj.q_g_var[i] == inj.q_g_var[0]);
    }
}

TEST_CASE("apply_control respects the capability bound for random feeders") {
    std::mt19937_64 rng(99);
    const auto u = [&rng](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    for (int trial = 0; trial < 50; ++trial) {
        ScenarioSpec s = case_spec(1 + static_cast<int>(rng() % 4));
        s.node_count = 40;
        s.topology_seed = rng();
        s.load_seed = rng();
        const Feeder f = generate_feeder(s);
        ControlConfig cfg = config(Scheme::hybrid, u(-5.0, 10.0));
        cfg.coeff_mode = (rng() & 1) ? CoeffMode::paper_literal : CoeffMode::drop_nulling;
        const Injection inj = apply_control(f, cfg);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double q_max =
                reactive_capability_var(f.nodes[i].s_va, f.nodes[i].p_g_w);
            CHECK(std::abs(inj.q_g_var[i]) <= q_max);
        }
    }
}

TEST_CASE("feeder alpha and ratio uniformity") {
    ScenarioSpec s = case_spec(2);
    const Feeder f = generate_feeder(s);
    CHECK(feeder_alpha(f) == doctest::Approx(kAlpha).epsilon(1e-12));
    CHECK(has_uniform_impedance_ratio(f));

    Feeder mixed = f;
    mixed.lines[3].r_ohm *= 1.5;
    CHECK_FALSE(has_uniform_impedance_ratio(mixed));
}

TEST_CASE("control config validation") {
    ControlConfig cfg;
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.alpha = 1.0;
    cfg.k = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}
