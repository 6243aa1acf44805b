#include "oracles.hpp"

#include "rmhedge/presets.hpp"
#include "rmhedge/simulate.hpp"

#include <gtest/gtest.h>

using namespace rmhedge;
using json = nlohmann::json;

namespace {

MarketModelSpec line_model(double slope) {
    MarketModelSpec m;
    m.name = "line";
    m.d = 1;
    m.rW = 1;
    m.n = 1;
    m.levy = LevyMeasure::none(1);
    m.drift = [slope](double, const Vec&, int) { return vec({slope}); };
    m.diffusion = [](double, const Vec&, int) { return Mat(Mat::Zero(1, 1)); };
    return m;
}

MarketModelSpec chain_model() {
    return preset_model("exp_levy_regime", json{{"sigma", {{0.2}, {0.3}}},
                                                {"r", {0.01, 0.05}},
                                                {"rho", {{0.0, -0.1}, {0.1, 0.0}}},
                                                {"lambda", {{0.0, 1.5}, {0.5, 0.0}}}})
        .model;
}

}  // namespace

TEST(Simulate, NullDynamicsStayPut) {
    auto m = line_model(0.0);
    auto ens = simulate_paths(m, vec({3.0}), 0, TimeGrid(0, 1, 50), 4, 1);
    for (const auto& p : ens.paths)
        for (int k = 0; k <= 50; ++k) EXPECT_EQ(p.coord(k, 0), 3.0);
}

TEST(Simulate, ConstantDriftFollowsTheLine) {
    auto m = line_model(2.0);
    auto ens = simulate_paths(m, vec({1.0}), 0, TimeGrid(0, 2, 200), 2, 9);
    for (const auto& p : ens.paths)
        for (int k = 0; k <= 200; ++k) EXPECT_NEAR(p.coord(k, 0), 1.0 + 2.0 * p.grid.t(k), 1e-12);
}

TEST(Simulate, RegimeDistributionMatchesChainOracle) {
    auto m = chain_model();
    const std::size_t n = 40000;
    auto ens = simulate_paths(m, vec({100}), 0, TimeGrid(0, 1, 1000), n, 21);
    double in2 = 0.0;
    for (const auto& p : ens.paths) in2 += p.c.back() == 1 ? 1.0 : 0.0;
    const double phat = in2 / n;
    const double se = std::sqrt(phat * (1 - phat) / n);
    auto ref = oracle::chain_distribution({{0, 1.5}, {0.5, 0}}, 0, 1.0);
    EXPECT_NEAR(phat, ref(1), 3 * se + 1e-3);
}

TEST(Simulate, TransitionMartingalesAndDiscountedPriceHaveZeroMean) {
    auto m = chain_model();
    PathSimulator sim(m, vec({100}), 0, TimeGrid(0, 1, 500), 5);
    auto rep = martingale_diagnostic(sim, 20000);
    ASSERT_EQ(rep.items.size(), 3u);
    for (const auto& it : rep.items) EXPECT_FALSE(it.flagged) << it.quantity << " " << it.est.mean << " " << it.est.se;
}

TEST(Simulate, JumpCountMatchesLevyMass) {
    auto m = preset_model("merton_jump", json{{"jump_mean", -0.1}, {"jump_sd", 0.15}, {"jump_intensity", 2.0}}).model;
    SimOptions so;
    so.recordJumps = true;
    auto ens = simulate_paths(m, vec({100}), 0, TimeGrid(0, 1, 200), 20000, 8, so);
    RunningStats st;
    for (const auto& p : ens.paths) {
        st.add(static_cast<double>(p.jumps.size()));
        for (const auto& j : p.jumps) {
            EXPECT_GT(j.t, p.grid.t(j.step));
            EXPECT_LT(j.t, p.grid.t(j.step + 1));
        }
    }
    auto e = st.estimate();
    EXPECT_NEAR(e.mean, 2.0, 3 * e.se);
}

TEST(Simulate, BankAccountAndTransitionCounts) {
    auto m = chain_model();
    auto ens = simulate_paths(m, vec({100}), 1, TimeGrid(0, 2, 400), 50, 13);
    for (const auto& p : ens.paths) {
        auto b = bank_account(m, p);
        for (int k = 0; k <= p.grid.N; ++k) EXPECT_NEAR(b[k], p.bank[k], 1e-14 * b[k]);
        auto tp = transition_processes(p);
        int h01 = 0, h10 = 0;
        for (const auto& e : p.transitions) (e.from == 0 ? h01 : h10)++;
        EXPECT_EQ(tp.h(p.grid.N, 0, 1), h01);
        EXPECT_EQ(tp.h(p.grid.N, 1, 0), h10);
        for (const auto& e : p.transitions) {
            EXPECT_EQ(p.c[e.step], e.from);
            EXPECT_EQ(p.c[e.step + 1], e.to);
            EXPECT_DOUBLE_EQ(e.t, p.grid.t(e.step));
        }
        // M = H - compensator, compensator = sum 1_i lambda dt
        double comp = 0.0;
        for (int k = 0; k < p.grid.N; ++k) comp += p.c[k] == 0 ? 1.5 * p.grid.dt() : 0.0;
        EXPECT_NEAR(tp.mart(p.grid.N, 0, 1), h01 - comp, 1e-9);
    }
}

TEST(Simulate, ResultsIgnoreWorkerCount) {
    auto m = chain_model();
    SimOptions one, three;
    three.workers = 3;
    auto a = simulate_paths(m, vec({100}), 0, TimeGrid(0, 1, 100), 37, 99, one);
    auto b = simulate_paths(m, vec({100}), 0, TimeGrid(0, 1, 100), 37, 99, three);
    EXPECT_EQ(paths_csv(a), paths_csv(b));
    EXPECT_EQ(transitions_csv(a), transitions_csv(b));
    auto c = simulate_paths(m, vec({100}), 0, TimeGrid(0, 1, 100), 37, 100, one);
    EXPECT_NE(paths_csv(a), paths_csv(c));
}

TEST(Simulate, AntitheticPairsMirrorBrownianIncrements) {
    auto m = preset_model("black_scholes", json{}).model;
    SimOptions so;
    so.antithetic = true;
    so.recordBrownian = true;
    auto ens = simulate_paths(m, vec({100}), 0, TimeGrid(0, 1, 20), 4, 3, so);
    for (int k = 0; k < 20; ++k) EXPECT_EQ(ens.paths[0].brownian(k)(0), -ens.paths[1].brownian(k)(0));
}

TEST(Simulate, CoarseSwitchingStepThrows) {
    auto m = chain_model();
    PathSimulator sim(m, vec({100}), 0, TimeGrid(0, 1, 1), 1);
    EXPECT_FALSE(sim.warnings().empty());
    Path p;
    EXPECT_THROW(sim.simulate(0, p), StepTooCoarse);
}

TEST(Simulate, BadInputsAreRejected) {
    auto m = chain_model();
    EXPECT_THROW(PathSimulator(m, vec({100, 1}), 0, TimeGrid(0, 1, 10), 1), ConfigError);
    EXPECT_THROW(PathSimulator(m, vec({100}), 2, TimeGrid(0, 1, 10), 1), ConfigError);
    EXPECT_THROW(TimeGrid(1, 1, 10), ConfigError);
}

TEST(Simulate, BlowupIsReported) {
    auto m = line_model(0.0);
    m.drift = [](double, const Vec& z, int) { return vec({1e300 * z(0)}); };
    EXPECT_THROW(simulate_paths(m, vec({1e10}), 0, TimeGrid(0, 1, 10), 1, 1), PathBlowup);
}

TEST(Simulate, CsvHeaders) {
    auto m = chain_model();
    auto ens = simulate_paths(m, vec({100}), 0, TimeGrid(0, 1, 10), 2, 1);
    auto csv = paths_csv(ens);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "path,t,Y1,C,B");
    auto tr = transitions_csv(ens);
    EXPECT_FALSE(tr.empty());
}
