#include "oracles.hpp"

#include "rmhedge/generator.hpp"
#include "rmhedge/pide.hpp"
#include "rmhedge/presets.hpp"

#include <gtest/gtest.h>

using namespace rmhedge;
using json = nlohmann::json;

namespace {

MarketModelSpec regime_model(double rate = 0.0) {
    return preset_model("exp_levy_regime", json{{"sigma", {{0.15}, {0.35}}},
                                                {"r", rate},
                                                {"rho", {{0.0, -0.05}, {0.05, 0.0}}},
                                                {"lambda", {{0.0, 1.0}, {1.0, 0.0}}},
                                                {"levy", {{"type", "gaussian"}, {"mean", -0.5}, {"sd", 0.5}, {"mass", 0.5}}}})
        .model;
}

}  // namespace

TEST(Pide, ConstantClaimIsPreserved) {
    auto m = regime_model();
    auto div = dividend_family("constant", json{{"value", 1.0}}, m);
    SpatialGrid g({Axis(5, 2000, 101, true)});
    auto v = solve_pide(m, div, g, 0.02, {});
    for (int lv = 0; lv < v.levels(); ++lv)
        for (int c = 0; c < 2; ++c)
            for (int i = 0; i < g.size(); ++i) EXPECT_NEAR(v.at(lv, c, i), 1.0, 1e-12);
}

TEST(Pide, ConstantClaimIsDiscounted) {
    auto m = preset_model("black_scholes", json{{"r", 0.05}}).model;
    auto div = dividend_family("constant", json{{"value", 1.0}, {"maturity", 2.0}}, m);
    SpatialGrid g({Axis(5, 2000, 101, true)});
    auto v = solve_pide(m, div, g, 1e-3, {});
    // exp(-r dt) per step is exact for a constant rate
    for (int i = 0; i < g.size(); ++i) EXPECT_NEAR(v.at(0, 0, i), std::exp(-0.1), 1e-12);
    EXPECT_NEAR(v.value(1.0, vec({100}), 0), std::exp(-0.05), 1e-12);
}

TEST(Pide, BlackScholesCall) {
    auto m = preset_model("black_scholes", json{{"sigma", 0.2}, {"r", 0.03}}).model;
    auto div = dividend_family("call", json{{"strike", 100.0}}, m);
    SpatialGrid g({Axis(5, 2000, 401, true)});
    auto v = solve_pide(m, div, g, 1e-3, {});
    for (double s : {80.0, 100.0, 125.0}) {
        const double ref = oracle::bs_call(s, 100, 1, 0.2, 0.03);
        EXPECT_LT(std::abs(v.value(0, vec({s}), 0) - ref) / ref, 0.005) << s;
    }
    EXPECT_NEAR(v.value(0.5, vec({100}), 0), oracle::bs_call(100, 100, 0.5, 0.2, 0.03), 0.02);
}

TEST(Pide, MertonCall) {
    auto m = preset_model("merton_jump", json{{"jump_mean", -0.1}, {"jump_sd", 0.15}, {"jump_intensity", 1.0}}).model;
    auto div = dividend_family("call", json{{"strike", 100.0}}, m);
    SpatialGrid g({Axis(5, 2000, 401, true)});
    auto v = solve_pide(m, div, g, 2e-3, {});
    const double ref = oracle::merton_call(100, 100, 1, 0.2, 0, 1.0, -0.1, 0.15);
    EXPECT_LT(std::abs(v.value(0, vec({100}), 0) - ref) / ref, 0.01);
}

TEST(Pide, SecondOrderInSpace) {
    auto m = preset_model("black_scholes", json{{"sigma", 0.2}}).model;
    auto div = dividend_family("bump", json{{"center", 100.0}, {"width", 25.0}, {"amplitude", 10.0}}, m);
    auto price = [&](int n) {
        SpatialGrid g({Axis(20, 500, n, true)});
        return solve_pide(m, div, g, 2e-4, {}).value(0, vec({100}), 0);
    };
    const double a = price(101), b = price(201), c = price(401);
    const double ratio = (a - b) / (b - c);
    EXPECT_GT(ratio, 3.6);
    EXPECT_LT(ratio, 4.4);
}

TEST(Pide, RegimesDecoupleWithoutSwitching) {
    auto two = preset_model("exp_levy_regime", json{{"sigma", {{0.15}, {0.35}}}, {"lambda", {{0.0, 0.0}, {0.0, 0.0}}}}).model;
    auto div = dividend_family("call", json{{"strike", 100.0}}, two);
    SpatialGrid g({Axis(5, 2000, 201, true)});
    auto v = solve_pide(two, div, g, 2e-3, {});
    for (int c = 0; c < 2; ++c) {
        auto one = preset_model("black_scholes", json{{"sigma", c == 0 ? 0.15 : 0.35}}).model;
        auto d1 = dividend_family("call", json{{"strike", 100.0}}, one);
        auto w = solve_pide(one, d1, g, 2e-3, {});
        for (int i = 0; i < g.size(); ++i) EXPECT_NEAR(v.at(0, c, i), w.at(0, 0, i), 1e-11);
    }
}

TEST(Pide, ComparisonPrinciple) {
    auto m = regime_model(0.02);
    auto lo = dividend_family("call", json{{"strike", 110.0}}, m);
    auto hi = dividend_family("call", json{{"strike", 100.0}, {"transition", {{0.0, 1.0}, {0.5, 0.0}}}}, m);
    SpatialGrid g({Axis(5, 2000, 201, true)});
    auto a = solve_pide(m, lo, g, 5e-3, {});
    auto b = solve_pide(m, hi, g, 5e-3, {});
    for (int lv = 0; lv < a.levels(); ++lv)
        for (int c = 0; c < 2; ++c)
            for (int i = 0; i < g.size(); ++i) EXPECT_LE(a.at(lv, c, i), b.at(lv, c, i) + 1e-12);
}

TEST(Pide, TransitionPaymentsMatchChainOracle) {
    // zero terminal, a downgrade fee only: v depends on the regime alone
    auto m = preset_model("exp_levy_regime", json{{"sigma", {{0.2}, {0.3}}},
                                                  {"rho", {{0.0, -0.1}, {0.1, 0.0}}},
                                                  {"lambda", {{0.0, 1.0}, {0.5, 0.0}}}})
                 .model;
    auto div = dividend_family("zero", json{{"transition", {{0.0, 2.0}, {0.0, 0.0}}}, {"rate", {0.3, 0.0}}}, m);
    SpatialGrid g({Axis(5, 2000, 101, true)});
    auto v = solve_pide(m, div, g, 1e-4, {});
    auto w = oracle::regime_value({{0, 1.0}, {0.5, 0}}, {{0, 2.0}, {0, 0}}, {0.3, 0.0}, 1.0);
    EXPECT_NEAR(v.value(0, vec({100}), 0), w[0], 2e-4);
    EXPECT_NEAR(v.value(0, vec({100}), 1), w[1], 2e-4);
}

TEST(Pide, ResidualShrinksUnderRefinement) {
    // the solved field plugged into the generator nearly satisfies the equation;
    // derivatives of the interpolant need a stencil wider than one cell
    auto m = preset_model("black_scholes", json{{"sigma", 0.2}, {"r", 0.03}}).model;
    auto div = dividend_family("bump", json{{"center", 100.0}, {"width", 25.0}, {"amplitude", 10.0}}, m);
    auto residual = [&](int n, double dt) {
        SpatialGrid g({Axis(20, 500, n, true)});
        auto v = solve_pide(m, div, g, dt, {});
        v.queryPolicy = EscapePolicy::LinearContinuation;
        const int lv = v.levels() / 2;
        const double t = v.times()[lv];
        double worst = 0.0;
        for (double s : {80.0, 100.0, 120.0}) {
            const Vec z = vec({s});
            const double vt = (v.value(v.times()[lv + 1], z, 0) - v.value(v.times()[lv - 1], z, 0)) /
                              (v.times()[lv + 1] - v.times()[lv - 1]);
            AnalyticValue f;
            f.f = [&](double, const Vec& y, int c) { return v.level_value(lv, y, c, EscapePolicy::LinearContinuation); };
            f.fdStep = 2.0 * std::log(25.0) / (n - 1);
            worst = std::max(worst, std::abs(vt + apply_generator(m, f, t, z, 0) - 0.03 * v.value(t, z, 0)));
        }
        return worst;
    };
    const double coarse = residual(101, 1e-2), mid = residual(401, 2.5e-3), fine = residual(1601, 6.25e-4);
    EXPECT_LT(mid, coarse / 4);
    EXPECT_LT(fine, mid);
    EXPECT_LT(fine, 5e-3);
}

TEST(Pide, TwoDimensionalGridRuns) {
    auto m = preset_model("semi_markov_exp_levy", json{{"sigma", {0.2, 0.3}},
                                                       {"lambda_a", {{0.0, 0.5}, {1.0, 0.0}}},
                                                       {"lambda_b", {{0.0, 2.0}, {0.3, 0.0}}}})
                 .model;
    auto div = dividend_family("constant", json{{"value", 1.0}, {"transition", {{0.0, 1.0}, {0.0, 0.0}}}}, m);
    SpatialGrid g({Axis(10, 1000, 41, true), Axis(0, 2.5, 26)});
    auto v = solve_pide(m, div, g, 1e-2, {});
    EXPECT_TRUE(v.allFinite());
    // fee paid on 1 -> 2 only: regime 1 is worth more; both exceed the constant
    EXPECT_GT(v.value(0, vec({100, 0.0}), 0), v.value(0, vec({100, 0.0}), 1));
    EXPECT_GT(v.value(0, vec({100, 0.0}), 1), 1.0);
    // a longer clock raises lambda^{12} here
    EXPECT_GT(v.value(0, vec({100, 2.0}), 0), v.value(0, vec({100, 0.0}), 0));
}

TEST(Pide, BadInputs) {
    auto m = preset_model("black_scholes", json{}).model;
    auto div = dividend_family("call", json{{"strike", 100.0}}, m);
    SpatialGrid g({Axis(5, 2000, 41, true)});
    EXPECT_THROW(solve_pide(m, div, g, -1.0, {}), ConfigError);
    PideOptions po;
    po.storeEvery = 7;
    EXPECT_THROW(solve_pide(m, div, g, 0.01, po), ConfigError);
    SpatialGrid g2({Axis(5, 2000, 41, true), Axis(0, 1, 11)});
    EXPECT_THROW(solve_pide(m, div, g2, 0.01, {}), ConfigError);
    EXPECT_THROW(Axis(0.0, 1.0, 20, true), ConfigError);
}

TEST(ValueField, CsvRoundTrip) {
    auto m = preset_model("black_scholes", json{}).model;
    auto div = dividend_family("call", json{{"strike", 100.0}}, m);
    SpatialGrid g({Axis(5, 2000, 41, true)});
    auto v = solve_pide(m, div, g, 0.05, {});
    auto w = ValueField::from_csv(v.to_csv());
    ASSERT_EQ(w.levels(), v.levels());
    for (int lv = 0; lv < v.levels(); ++lv)
        for (int i = 0; i < g.size(); ++i) EXPECT_EQ(w.at(lv, 0, i), v.at(lv, 0, i));
}

TEST(ValueField, EscapePolicies) {
    auto m = preset_model("black_scholes", json{}).model;
    auto div = dividend_family("linear", json{{"slope", {1.0}}}, m);
    SpatialGrid g({Axis(5, 2000, 41, true)});
    auto v = solve_pide(m, div, g, 0.05, {});
    EXPECT_THROW(v.value(0, vec({5000}), 0, EscapePolicy::Throw), DomainEscape);
    EXPECT_NEAR(v.value(0, vec({5000}), 0, EscapePolicy::LinearContinuation), 5000.0, 1e-6);
    EXPECT_THROW(v.value(1.5, vec({100}), 0), DomainEscape);
}
