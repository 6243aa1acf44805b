#include "oracles.hpp"

#include "rmhedge/fk_mc.hpp"
#include "rmhedge/presets.hpp"

#include <gtest/gtest.h>

using namespace rmhedge;
using json = nlohmann::json;

TEST(FkMc, UnitTerminalIsExact) {
    auto m = preset_model("merton_jump", json{{"jump_mean", -0.1}, {"jump_sd", 0.15}, {"jump_intensity", 1.0}}).model;
    auto div = dividend_family("constant", json{{"value", 1.0}}, m);
    auto e = mc_value(m, div, 0.0, vec({100}), 0, 500, 1);
    EXPECT_EQ(e.mean, 1.0);
    EXPECT_EQ(e.se, 0.0);
    EXPECT_EQ(e.n, 500u);
}

TEST(FkMc, UnitRateOverTwoYears) {
    auto m = preset_model("exp_levy_regime", json{{"sigma", {{0.2}, {0.3}}}, {"lambda", {{0.0, 1.0}, {1.0, 0.0}}}}).model;
    auto div = dividend_family("zero", json{{"rate", 1.0}, {"maturity", 2.0}}, m);
    MCOptions o;
    o.steps = 64;
    auto e = mc_value(m, div, 0.0, vec({100}), 1, 200, 3, o);
    EXPECT_NEAR(e.mean, 2.0, 1e-13);
    EXPECT_LT(e.se, 1e-13);
}

TEST(FkMc, BlackScholesCallWithinThreeSE) {
    auto m = preset_model("black_scholes", json{{"sigma", 0.2}, {"r", 0.03}}).model;
    auto div = dividend_family("call", json{{"strike", 100.0}}, m);
    MCOptions o;
    o.steps = 200;
    auto e = mc_value(m, div, 0.0, vec({100}), 0, 100000, 42, o);
    EXPECT_NEAR(e.mean, oracle::bs_call(100, 100, 1, 0.2, 0.03), 3 * e.se);
    auto late = mc_value(m, div, 0.5, vec({110}), 0, 100000, 43, o);
    EXPECT_NEAR(late.mean, oracle::bs_call(110, 100, 0.5, 0.2, 0.03), 3 * late.se);
}

TEST(FkMc, MertonCallWithinThreeSE) {
    auto m = preset_model("merton_jump", json{{"jump_mean", -0.1}, {"jump_sd", 0.15}, {"jump_intensity", 1.0}}).model;
    auto div = dividend_family("call", json{{"strike", 100.0}}, m);
    MCOptions o;
    o.steps = 200;
    auto e = mc_value(m, div, 0.0, vec({100}), 0, 100000, 44, o);
    EXPECT_NEAR(e.mean, oracle::merton_call(100, 100, 1, 0.2, 0, 1.0, -0.1, 0.15), 3 * e.se);
}

TEST(FkMc, TransitionPaymentsMatchChainOracle) {
    auto m = preset_model("exp_levy_regime", json{{"sigma", {{0.2}, {0.3}}},
                                                  {"r", 0.04},
                                                  {"rho", {{0.0, -0.1}, {0.1, 0.0}}},
                                                  {"lambda", {{0.0, 1.0}, {0.5, 0.0}}}})
                 .model;
    auto div = dividend_family("zero", json{{"transition", {{0.0, 2.0}, {1.0, 0.0}}}}, m);
    MCOptions o;
    o.steps = 1000;
    auto e = mc_value(m, div, 0.0, vec({100}), 0, 40000, 45, o);
    const double ref = oracle::chain_expected_payments({{0, 1.0}, {0.5, 0}}, {{0, 2.0}, {1.0, 0}}, 0, 1.0, 0.04);
    EXPECT_NEAR(e.mean, ref, 3 * e.se + 2e-3);
}

TEST(FkMc, EnsembleAndRestartAgreeBitForBit) {
    auto m = preset_model("exp_levy_regime", json{{"sigma", {{0.2}, {0.3}}},
                                                  {"r", 0.01},
                                                  {"lambda", {{0.0, 1.0}, {1.0, 0.0}}},
                                                  {"levy", {{"type", "gaussian"}, {"mean", -0.5}, {"sd", 0.5}, {"mass", 0.5}}}})
                 .model;
    auto div = dividend_family("call", json{{"strike", 100.0}, {"rate", {0.1, 0.2}}, {"transition", {{0.0, 1.0}, {0.0, 0.0}}}}, m);
    SimOptions so;
    so.recordJumps = true;
    auto ens = simulate_paths(m, vec({100}), 0, TimeGrid(0, 1, 50), 300, 9, so);
    auto xs = mc_discounted_dividends(m, div, ens);
    auto a = estimate_from(xs, 9);
    MCOptions o;
    o.steps = 50;
    auto b = mc_value(m, div, 0.0, vec({100}), 0, 300, 9, o);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.se, b.se);
}

TEST(FkMc, WorkerCountDoesNotChangeEstimate) {
    auto m = preset_model("merton_jump", json{{"jump_mean", -0.1}, {"jump_sd", 0.15}, {"jump_intensity", 1.0}}).model;
    auto div = dividend_family("put", json{{"strike", 100.0}}, m);
    MCOptions one, four;
    one.steps = four.steps = 20;
    four.workers = 4;
    auto a = mc_value(m, div, 0.0, vec({100}), 0, 1001, 5, one);
    auto b = mc_value(m, div, 0.0, vec({100}), 0, 1001, 5, four);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.se, b.se);
}

TEST(FkMc, StandardErrorScalesWithPaths) {
    auto m = preset_model("black_scholes", json{}).model;
    auto div = dividend_family("call", json{{"strike", 100.0}}, m);
    MCOptions o;
    o.steps = 20;
    auto a = mc_value(m, div, 0.0, vec({100}), 0, 10000, 1, o);
    auto b = mc_value(m, div, 0.0, vec({100}), 0, 40000, 2, o);
    EXPECT_NEAR(a.se / b.se, 2.0, 0.15);
}

TEST(FkMc, AntitheticReducesVarianceForMonotonePayoff) {
    auto m = preset_model("black_scholes", json{}).model;
    auto div = dividend_family("linear", json{{"slope", {1.0}}}, m);
    MCOptions plain, anti;
    plain.steps = anti.steps = 20;
    anti.antithetic = true;
    auto a = mc_value(m, div, 0.0, vec({100}), 0, 20000, 1, plain);
    auto b = mc_value(m, div, 0.0, vec({100}), 0, 20000, 1, anti);
    EXPECT_EQ(b.n, 10000u);
    // Euler S_T is a product of (1 + sigma dW), so pairs cancel only to first order
    EXPECT_LT(b.se, 0.3 * a.se);
}

TEST(FkMc, AtMaturityReturnsPayoff) {
    auto m = preset_model("black_scholes", json{}).model;
    auto div = dividend_family("call", json{{"strike", 100.0}}, m);
    auto e = mc_value(m, div, 1.0, vec({130}), 0, 10, 1);
    EXPECT_EQ(e.mean, 30.0);
    EXPECT_EQ(e.se, 0.0);
}

TEST(ConfidenceReport, FlagsAndJson) {
    std::vector<ProbeRow> rows(3);
    rows[0].est = {1.0, 0.1, 100, 1};
    rows[0].reference = 1.2;
    rows[1].est = {1.0, 0.1, 100, 1};
    rows[1].reference = 1.5;
    rows[2].est = {2.0, 0.0, 100, 1};
    rows[2].reference = 2.0;
    for (auto& r : rows) r.y = vec({100});
    rows[1].c = 1;
    auto rep = mc_confidence_report(rows);
    EXPECT_EQ(rep.flags(), 1u);
    EXPECT_FALSE(rep.rows[0].flag);
    EXPECT_TRUE(rep.rows[1].flag);
    EXPECT_FALSE(rep.rows[2].flag);
    EXPECT_NEAR(rep.fraction(), 1.0 / 3.0, 1e-15);
    auto j = rep.to_json();
    EXPECT_EQ(j[1]["c"], 2);
    EXPECT_EQ(j[1]["flag"], true);
    EXPECT_DOUBLE_EQ(j[0]["SE"].get<double>(), 0.1);
}
