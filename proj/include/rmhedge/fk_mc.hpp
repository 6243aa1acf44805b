#pragma once

#include "rmhedge/model.hpp"
#include "rmhedge/risk.hpp"
#include "rmhedge/simulate.hpp"
#include "rmhedge/types.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace rmhedge {

struct MCEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

/// Plain mean (summed in index order) and SE = sample std / sqrt(n).
inline MCEstimate estimate_from(const std::vector<double>& xs, std::uint64_t seed = 0) {
    MCEstimate e;
    e.seed = seed;
    e.n = xs.size();
    if (xs.empty()) return e;
    double s = 0.0;
    for (double x : xs) s += x;
    e.mean = s / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double q = 0.0;
        for (double x : xs) q += (x - e.mean) * (x - e.mean);
        e.se = std::sqrt(q / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    }
    return e;
}

/// X = int B^{-1} dD on every path of an ensemble, B from the path.
inline std::vector<double> mc_discounted_dividends(const MarketModelSpec& m, const DividendSpec& div,
                                                   const PathEnsemble& ens) {
    std::vector<double> out;
    out.reserve(ens.paths.size());
    for (const auto& p : ens.paths) {
        double x = 0.0;
        for (double v : discounted_dividends(m, div, p)) x += v;
        out.push_back(x);
    }
    return out;
}

struct MCOptions {
    int steps = 100;          ///< Euler steps over [t, T]
    bool antithetic = false;  ///< pair paths (2k, 2k+1) and average each pair
    int workers = 1;
};

/// Ex-dividend value at (t, y, c) by simulation restarted at t with B_t = 1.
inline MCEstimate mc_value(const MarketModelSpec& m, const DividendSpec& div, double t, const Vec& y, int c,
                           std::size_t nPaths, std::uint64_t seed, MCOptions opt = {}) {
    const double T = div.maturity;
    if (!(t < T)) {
        MCEstimate e;
        e.mean = div.h(y, c);
        e.n = nPaths;
        e.seed = seed;
        return e;
    }
    SimOptions so;
    so.recordJumps = true;
    so.antithetic = opt.antithetic;
    so.workers = opt.workers;
    PathSimulator sim(m, y, c, TimeGrid(t, T, opt.steps), seed, so);
    auto xs = map_paths(sim, nPaths, [&](const Path& p) {
        double x = 0.0;
        for (double v : discounted_dividends(m, div, p)) x += v;
        return x;
    });
    if (opt.antithetic) {
        std::vector<double> pairs;
        pairs.reserve(xs.size() / 2);
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) pairs.push_back(0.5 * (xs[k] + xs[k + 1]));
        return estimate_from(pairs, seed);
    }
    return estimate_from(xs, seed);
}

struct ProbeRow {
    double t = 0.0;
    Vec y;
    int c = 0;
    MCEstimate est;
    double reference = 0.0;
    bool flag = false;
};

struct ProbeReport {
    std::vector<ProbeRow> rows;
    std::size_t flags() const {
        std::size_t n = 0;
        for (const auto& r : rows) n += r.flag ? 1 : 0;
        return n;
    }
    double fraction() const { return rows.empty() ? 0.0 : static_cast<double>(flags()) / rows.size(); }

    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : rows)
            j.push_back({{"t", r.t},
                         {"y", to_std(r.y)},
                         {"c", r.c + 1},
                         {"estimate", r.est.mean},
                         {"SE", r.est.se},
                         {"reference", r.reference},
                         {"flag", r.flag}});
        return j;
    }
};

/// Flag |estimate - reference| > nSE * SE. With SE = 0 any difference flags.
inline ProbeReport mc_confidence_report(const std::vector<ProbeRow>& rows, double nSE = 3.0) {
    ProbeReport rep;
    rep.rows = rows;
    for (auto& r : rep.rows) r.flag = std::abs(r.est.mean - r.reference) > nSE * r.est.se;
    return rep;
}

}  // namespace rmhedge
