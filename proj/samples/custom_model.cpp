// A hand-built two-regime model with a put that pays a fee on downgrades.
#include "rmhedge/fk_mc.hpp"
#include "rmhedge/gkw.hpp"
#include "rmhedge/pide.hpp"
#include "rmhedge/validate.hpp"

#include <cstdio>

using namespace rmhedge;

int main() {
    MarketModelSpec m;
    m.name = "two_state_gbm";
    m.regimes = RegimeSet(2);
    m.d = 1;
    m.rW = 1;
    m.levy = LevyMeasure::none(1);
    const double vol[2] = {0.15, 0.35};
    const double lam[2][2] = {{0.0, 0.4}, {0.8, 0.0}};
    m.shortRate = [](double, const Vec&, int) { return 0.01; };
    m.drift = [](double, const Vec& z, int) { return vec({0.01 * z(0)}); };
    m.diffusion = [vol](double, const Vec& z, int c) {
        Mat s(1, 1);
        s(0, 0) = vol[c] * z(0);
        return s;
    };
    m.intensity = [lam](int i, int j, double, const Vec&) { return lam[i][j]; };
    m.intensityBound = 0.8;
    // 10% drop on a downgrade, 5% rebound on an upgrade
    m.regimeJump = [](int i, int, double, const Vec& z) { return vec({z(0) * (i == 0 ? -0.10 : 0.05)}); };

    DividendSpec put;
    put.name = "put_with_fee";
    put.maturity = 1.0;
    put.terminal = [](const Vec& z, int) { return std::max(100.0 - z(0), 0.0); };
    put.transition = [](int i, int, double, const Vec&) { return i == 0 ? 2.0 : 0.0; };

    auto plan = SamplePlan::box(m, vec({50.0}), vec({200.0}), 7, {0.0, 0.5});
    auto rep = validate_model(m, plan);
    if (!rep.ok()) {
        for (const auto& c : rep.checks)
            if (!c.passed) std::printf("validation failed: %s %s\n", c.name.c_str(), c.detail.c_str());
        return 1;
    }

    SpatialGrid grid({Axis(10.0, 1000.0, 401, true)});
    ValueField v = solve_pide(m, put, grid, 2e-3);
    HedgeField hf = hedge_field(m, put, v);
    for (int c = 0; c < 2; ++c) {
        Vec s0 = vec({100.0});
        double mc = mc_value(m, put, 0.0, s0, c, 40000, 11, {200}).mean;
        std::printf("regime %d  pide %.4f  mc %.4f  phi %.4f\n", c + 1, v.value(0.0, s0, c), mc, hf.phi(0.0, s0, c)(0));
    }
    return 0;
}
