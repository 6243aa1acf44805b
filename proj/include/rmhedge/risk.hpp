#pragma once

#include "rmhedge/gkw.hpp"
#include "rmhedge/model.hpp"
#include "rmhedge/simulate.hpp"
#include "rmhedge/types.hpp"

#include "json.hpp"

#include <concepts>
#include <functional>
#include <string>
#include <vector>

namespace rmhedge {

/// Source of the strategy, the price and the undiscounted risk density along paths.
template <class H>
concept HedgeProvider = requires(const H& h, double t, const Vec& y, int c) {
    { h.phi(t, y, c) } -> std::convertible_to<Vec>;
    { h.value(t, y, c) } -> std::convertible_to<double>;
    { h.density(t, y, c) } -> std::convertible_to<RiskDensity>;
};

/// Tabulated value and hedge fields; queries outside the band continue linearly.
struct FieldHedge {
    const ValueField* v = nullptr;
    const HedgeField* hf = nullptr;
    EscapePolicy policy = EscapePolicy::LinearContinuation;

    Vec phi(double t, const Vec& y, int c) const { return hf->phi(t, y, c); }
    double value(double t, const Vec& y, int c) const { return v->value(t, y, c, policy); }
    RiskDensity density(double t, const Vec& y, int c) const { return hf->density(t, y, c); }
};

/// hedge_at evaluated on demand from any value source; supports semimartingale dividends.
template <ValueSource V>
struct PointwiseHedge {
    const MarketModelSpec* m = nullptr;
    const DividendSpec* div = nullptr;
    const V* v = nullptr;
    const SemimartingaleDividendSpec* sd = nullptr;
    EscapePolicy policy = EscapePolicy::Throw;

    HedgePoint at(double t, const Vec& y, int c) const { return hedge_at(*m, *div, *v, t, y, c, policy, sd); }
    Vec phi(double t, const Vec& y, int c) const { return at(t, y, c).phi; }
    double value(double t, const Vec& y, int c) const { return v->value(t, y, c); }
    RiskDensity density(double t, const Vec& y, int c) const { return at(t, y, c).density; }
};

static_assert(HedgeProvider<FieldHedge>);

/// Discounted payments per step: inc[k] (k < N) is paid during [t_k, t_{k+1}),
/// inc[N] = h / B_T. Rates accrue as g dt / B_k, a switch logged on step k pays
/// delta / B_k; semimartingale loadings add their Euler increments.
inline std::vector<double> discounted_dividends(const MarketModelSpec& m, const DividendSpec& div, const Path& p,
                                                const SemimartingaleDividendSpec* sd = nullptr) {
    const int N = p.grid.N;
    const double dt = p.grid.dt();
    std::vector<double> inc(N + 1, 0.0);
    if (div.hasRate())
        for (int k = 0; k < N; ++k) inc[k] += div.g(p.grid.t(k), p.state(k), p.c[k]) * dt / p.bank[k];
    if (div.hasTransition())
        for (const auto& e : p.transitions)
            inc[e.step] += div.delta(e.from, e.to, e.t, p.state(e.step)) / p.bank[e.step];
    inc[N] = div.h(p.state(N), p.c[N]) / p.bank[N];
    if (sd) {
        if (m.rW > 0 && sd->brownianLoading && p.dW.empty())
            throw ConfigError("semimartingale dividends need recorded Brownian increments");
        std::size_t e = 0, jx = 0;
        for (int k = 0; k < N; ++k) {
            const double t = p.grid.t(k);
            const Vec z = p.state(k);
            const int c = p.c[k];
            double a = 0.0;
            if (m.rW > 0 && sd->brownianLoading) a += sd->deltaD(t, z, c, m.rW).dot(p.brownian(k));
            if (m.hasLevy() && sd->jumpLoading) {
                while (jx < p.jumps.size() && p.jumps[jx].step == k) a += sd->JD(t, z, c, p.jumps[jx++].x);
                a -= integrate_levy(m.levy, [&](const Vec& x) { return sd->JD(t, z, c, x); }) * dt;
            }
            if (sd->transitionLoading) {
                for (int j = 0; j < m.K(); ++j)
                    if (j != c) a -= sd->gammaD(c, j, t, z) * m.lambda(c, j, t, z) * dt;
                while (e < p.transitions.size() && p.transitions[e].step == k) {
                    a += sd->gammaD(p.transitions[e].from, p.transitions[e].to, t, z);
                    ++e;
                }
            }
            inc[k] += a / p.bank[k];
        }
    }
    return inc;
}

/// Per-path quantities for the risk-minimizing strategy.
struct PathRisk {
    double X = 0.0;        ///< int B^{-1} dD
    double L = 0.0;        ///< L^X_T = C_T - C_0
    double Rint = 0.0;     ///< int of the discounted risk density
    RiskDensity parts;     ///< split of Rint by source
    std::vector<double> cov;    ///< sum Delta L Delta S*_k per asset
    std::vector<double> Lpert;  ///< L - int psi dS* per perturbation
};

using Perturbation = std::function<Vec(double t, const Vec& y, int c)>;

struct RiskOptions {
    const SemimartingaleDividendSpec* sd = nullptr;
    std::vector<Perturbation> perturbations;
    bool integral = true;  ///< accumulate the density integral
};

/// L_k = V*_k + I_k - v_0 - sum_{l<k} phi_l . Delta S*_l with V*_N = 0 and
/// every coefficient taken at the left endpoint of its step.
template <HedgeProvider H>
PathRisk path_risk(const MarketModelSpec& m, const DividendSpec& div, const H& hedge, const Path& p,
                   const RiskOptions& opt = {}) {
    PathRisk out;
    const int N = p.grid.N;
    const int d = m.d;
    const double dt = p.grid.dt();
    auto inc = discounted_dividends(m, div, p, opt.sd);
    out.cov.assign(d, 0.0);
    out.Lpert.assign(opt.perturbations.size(), 0.0);

    const Vec z0 = p.state(0);
    const double v0 = hedge.value(p.grid.t(0), z0, p.c[0]);
    double Lprev = 0.0;  // L_0 = 0
    double I = 0.0;
    for (int k = 0; k < N; ++k) {
        const double t = p.grid.t(k);
        const Vec z = p.state(k);
        const int c = p.c[k];
        const double B = p.bank[k];
        const Vec phi = hedge.phi(t, z, c);
        Vec dS(d);
        for (int a = 0; a < d; ++a) dS(a) = p.coord(k + 1, a) / p.bank[k + 1] - z(a) / B;
        I += inc[k];
        if (k + 1 == N) I += inc[N];
        const double Vnext = (k + 1 < N) ? hedge.value(p.grid.t(k + 1), p.state(k + 1), p.c[k + 1]) / p.bank[k + 1] : 0.0;
        // running gain sum_{l<=k} phi_l . dS_l
        out.L -= phi.dot(dS);
        const double Lk = Vnext + I - v0 + out.L;
        const double dL = Lk - Lprev;
        Lprev = Lk;
        for (int a = 0; a < d; ++a) out.cov[a] += dL * dS(a);
        for (std::size_t q = 0; q < opt.perturbations.size(); ++q) out.Lpert[q] -= opt.perturbations[q](t, z, c).dot(dS);
        if (opt.integral) {
            RiskDensity rd = hedge.density(t, z, c);
            const double w = dt / (B * B);
            out.parts.brownian += rd.brownian * w;
            out.parts.jump += rd.jump * w;
            out.parts.regime += rd.regime * w;
        }
    }
    out.L = Lprev;
    for (auto& lp : out.Lpert) lp += out.L;
    out.Rint = out.parts.total();
    double x = 0.0;
    for (double v : inc) x += v;
    out.X = x;
    return out;
}

/// Strategy given as phi and eta (V = phi^T S + eta B).
struct Strategy {
    std::function<Vec(double t, const Vec& y, int c)> phi;
    std::function<double(double t, const Vec& y, int c, double B)> eta;  ///< eta at t
};

/// C_k = int_0^{t_k} B^{-1} dD + V*_k - sum_{l<k} phi_l . Delta S*_l at each node.
inline std::vector<double> cost_process(const MarketModelSpec& m, const DividendSpec& div, const Strategy& s,
                                        const Path& p, const SemimartingaleDividendSpec* sd = nullptr) {
    const int N = p.grid.N;
    const int d = m.d;
    auto inc = discounted_dividends(m, div, p, sd);
    std::vector<double> C(N + 1, 0.0);
    double I = 0.0, gain = 0.0;
    for (int k = 0; k <= N; ++k) {
        const double t = p.grid.t(k);
        const Vec z = p.state(k);
        const int c = p.c[k];
        if (k == N) I += inc[N];
        // phi at node k is the left limit on (t_{k-1}, t_k]
        const Vec phi = s.phi(k == 0 ? t : p.grid.t(k - 1), k == 0 ? z : p.state(k - 1), k == 0 ? c : p.c[k - 1]);
        double Sstar = 0.0;
        for (int a = 0; a < d; ++a) Sstar += phi(a) * z(a) / p.bank[k];
        const double V = Sstar + (s.eta ? s.eta(t, z, c, p.bank[k]) : 0.0);
        C[k] = I + V - gain;
        if (k < N) {
            const Vec ph = s.phi(t, z, c);
            for (int a = 0; a < d; ++a) gain += ph(a) * (p.coord(k + 1, a) / p.bank[k + 1] - z(a) / p.bank[k]);
            I += inc[k];
        }
    }
    return C;
}

struct RiskReport {
    std::size_t paths = 0;
    Estimate X;
    Estimate meanCost;   ///< C_T - C_0
    Estimate direct;     ///< E[(L^X_T)^2]
    Estimate integral;   ///< E int density
    Estimate brownian, jump, regime;
    Estimate gap;        ///< paired integral - direct
    std::vector<Estimate> cov;
    std::vector<Estimate> perturbed;      ///< E[L'^2]
    std::vector<Estimate> perturbedGap;   ///< paired E[L'^2 - L^2]

    nlohmann::json to_json() const {
        auto e = [](const Estimate& s) { return nlohmann::json{{"mean", s.mean}, {"se", s.se}, {"n", s.n}}; };
        nlohmann::json j;
        j["paths"] = paths;
        j["X"] = e(X);
        j["cost_increment"] = e(meanCost);
        j["R0_direct"] = e(direct);
        j["R0_integral"] = e(integral);
        j["R0_sources"] = {{"brownian", e(brownian)}, {"jump", e(jump)}, {"transition", e(regime)}};
        j["integral_minus_direct"] = e(gap);
        j["covariation"] = nlohmann::json::array();
        for (const auto& c : cov) j["covariation"].push_back(e(c));
        j["perturbed"] = nlohmann::json::array();
        for (std::size_t q = 0; q < perturbed.size(); ++q)
            j["perturbed"].push_back({{"R0", e(perturbed[q])}, {"minus_R0", e(perturbedGap[q])}});
        return j;
    }
};

inline RiskReport summarize_risk(const std::vector<PathRisk>& rows) {
    RiskReport rep;
    rep.paths = rows.size();
    if (rows.empty()) return rep;
    const std::size_t d = rows.front().cov.size();
    const std::size_t q = rows.front().Lpert.size();
    RunningStats x, mc, dr, in, b, j, r, gp;
    std::vector<RunningStats> cv(d), pt(q), pg(q);
    for (const auto& w : rows) {
        x.add(w.X);
        mc.add(w.L);
        dr.add(w.L * w.L);
        in.add(w.Rint);
        b.add(w.parts.brownian);
        j.add(w.parts.jump);
        r.add(w.parts.regime);
        gp.add(w.Rint - w.L * w.L);
        for (std::size_t a = 0; a < d; ++a) cv[a].add(w.cov[a]);
        for (std::size_t a = 0; a < q; ++a) {
            pt[a].add(w.Lpert[a] * w.Lpert[a]);
            pg[a].add(w.Lpert[a] * w.Lpert[a] - w.L * w.L);
        }
    }
    rep.X = x.estimate();
    rep.meanCost = mc.estimate();
    rep.direct = dr.estimate();
    rep.integral = in.estimate();
    rep.brownian = b.estimate();
    rep.jump = j.estimate();
    rep.regime = r.estimate();
    rep.gap = gp.estimate();
    for (auto& s : cv) rep.cov.push_back(s.estimate());
    for (auto& s : pt) rep.perturbed.push_back(s.estimate());
    for (auto& s : pg) rep.perturbedGap.push_back(s.estimate());
    return rep;
}

/// Simulate and reduce in path order.
template <HedgeProvider H>
RiskReport residual_risk(const MarketModelSpec& m, const DividendSpec& div, const H& hedge, const PathSimulator& sim,
                         std::size_t nPaths, const RiskOptions& opt = {}) {
    auto rows = map_paths(sim, nPaths, [&](const Path& p) { return path_risk(m, div, hedge, p, opt); });
    return summarize_risk(rows);
}

}  // namespace rmhedge
