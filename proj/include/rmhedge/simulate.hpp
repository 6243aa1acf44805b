#pragma once

#include "rmhedge/errors.hpp"
#include "rmhedge/io.hpp"
#include "rmhedge/model.hpp"
#include "rmhedge/rng.hpp"
#include "rmhedge/types.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace rmhedge {

/// Uniform time grid t_k = t0 + k (T - t0) / N.
struct TimeGrid {
    double t0 = 0.0;
    double T = 1.0;
    int N = 100;

    TimeGrid() = default;
    TimeGrid(double t0_, double T_, int N_) : t0(t0_), T(T_), N(N_) {
        if (!(T > t0) || N < 1) throw ConfigError("time grid needs t0 < T and N >= 1");
    }
    double dt() const { return (T - t0) / N; }
    double t(int k) const { return k == N ? T : t0 + k * dt(); }
};

struct JumpEvent {
    int step = 0;
    double t = 0.0;  ///< strictly inside (t_k, t_{k+1})
    std::size_t node = 0;
    Vec x;
};

/// A switch i -> j drawn on step k is stamped at the step's left endpoint t_k.
struct TransitionEvent {
    int step = 0;
    double t = 0.0;
    int from = 0;
    int to = 0;
};

struct Path {
    std::size_t index = 0;
    int m = 0;
    int K = 1;
    int rW = 0;
    TimeGrid grid;
    std::vector<double> y;      ///< (N+1) x m, row-major
    std::vector<int> c;         ///< N+1
    std::vector<double> bank;   ///< N+1
    std::vector<double> comp;   ///< (N+1) x K x K cumulative int 1_i(C) lambda^{ij} du
    std::vector<double> dW;     ///< N x rW, when recorded
    std::vector<JumpEvent> jumps;
    std::vector<TransitionEvent> transitions;

    int steps() const { return grid.N; }
    Vec state(int k) const {
        Vec v(m);
        for (int a = 0; a < m; ++a) v(a) = y[static_cast<std::size_t>(k) * m + a];
        return v;
    }
    double coord(int k, int a) const { return y[static_cast<std::size_t>(k) * m + a]; }
    double compensator(int k, int i, int j) const {
        return comp[(static_cast<std::size_t>(k) * K + i) * K + j];
    }
    Vec brownian(int k) const {
        Vec v(rW);
        for (int a = 0; a < rW; ++a) v(a) = dW[static_cast<std::size_t>(k) * rW + a];
        return v;
    }
};

struct SimOptions {
    bool recordBrownian = false;
    bool recordJumps = true;
    bool antithetic = false;  ///< odd paths reuse the previous seed with negated normals
    int workers = 1;
    double coarseWarn = 0.5;  ///< warn when sum lambda * dt exceeds this
};

/// Euler-Maruyama for the state equation with every coefficient frozen at the
/// left point; Levy jumps are compound Poisson over the node table and a
/// regime switch is a single Bernoulli draw per step.
class PathSimulator {
public:
    PathSimulator(const MarketModelSpec& model, Vec y0, int c0, TimeGrid grid, std::uint64_t seed,
                  SimOptions opt = {})
        : model_(model), y0_(std::move(y0)), c0_(c0), grid_(grid), seed_(seed), opt_(opt) {
        if (y0_.size() != model_.dim()) throw ConfigError("initial state has wrong dimension");
        if (!model_.regimes.contains(c0_)) throw ConfigError("initial regime out of range");
        mass_ = model_.hasLevy() ? model_.levy.totalMass() : 0.0;
        if (model_.hasSwitching() && model_.intensityBound * (model_.K() - 1) * grid_.dt() > opt_.coarseWarn)
            warn("StepTooCoarse: declared intensity bound x (K-1) x dt exceeds " + fmt_num(opt_.coarseWarn));
    }

    const MarketModelSpec& model() const { return model_; }
    const TimeGrid& grid() const { return grid_; }
    std::uint64_t seed() const { return seed_; }
    const SimOptions& options() const { return opt_; }
    const Vec& y0() const { return y0_; }
    int c0() const { return c0_; }

    std::vector<std::string> warnings() const {
        std::lock_guard<std::mutex> lk(mu_);
        return {warnings_.begin(), warnings_.end()};
    }

    void simulate(std::size_t index, Path& p) const {
        const int m = model_.dim();
        const int K = model_.K();
        const int N = grid_.N;
        const int rW = model_.rW;
        const double dt = grid_.dt();
        const double sdt = std::sqrt(dt);
        const bool anti = opt_.antithetic && (index % 2 == 1);
        Engine eng = make_engine(seed_, anti ? index - 1 : index);
        boost::random::normal_distribution<double> normal;
        boost::random::uniform_01<double> unif;

        p.index = index;
        p.m = m;
        p.K = K;
        p.rW = rW;
        p.grid = grid_;
        p.y.assign(static_cast<std::size_t>(N + 1) * m, 0.0);
        p.c.assign(N + 1, c0_);
        p.bank.assign(N + 1, 1.0);
        p.comp.assign(static_cast<std::size_t>(N + 1) * K * K, 0.0);
        p.dW.assign(opt_.recordBrownian ? static_cast<std::size_t>(N) * rW : 0, 0.0);
        p.jumps.clear();
        p.transitions.clear();

        Vec y = y0_;
        int c = c0_;
        double logB = 0.0;
        for (int a = 0; a < m; ++a) p.y[a] = y(a);
        Vec dW(rW);
        std::vector<double> lam(K, 0.0);

        for (int k = 0; k < N; ++k) {
            const double t = grid_.t(k);
            // Left-point coefficients.
            Vec mu = model_.compensatedDrift(t, y, c);
            Mat sg = model_.diffusion(t, y, c);
            double r = model_.rate(t, y, c);
            double lamTot = 0.0;
            if (model_.hasSwitching()) {
                for (int j = 0; j < K; ++j) {
                    lam[j] = model_.lambda(c, j, t, y);
                    lamTot += lam[j];
                }
            }

            for (int a = 0; a < rW; ++a) {
                double g = normal(eng);
                dW(a) = (anti ? -g : g) * sdt;
            }
            if (opt_.recordBrownian)
                for (int a = 0; a < rW; ++a) p.dW[static_cast<std::size_t>(k) * rW + a] = dW(a);

            Vec next = y + mu * dt;
            if (rW > 0) next += sg * dW;

            if (mass_ > 0.0) {
                boost::random::poisson_distribution<int, double> pois(mass_ * dt);
                int cnt = pois(eng);
                for (int q = 0; q < cnt; ++q) {
                    std::size_t node = model_.levy.sample_index(unif(eng));
                    double frac = unif(eng);
                    const Vec& x = model_.levy.nodes()[node].x;
                    next += model_.F(t, y, c, x);
                    if (opt_.recordJumps) {
                        double tj = t + (0.5 + 0.5 * frac) * dt;  // kept strictly inside the step
                        p.jumps.push_back({k, std::min(tj, std::nextafter(grid_.t(k + 1), t)), node, x});
                    }
                }
            }

            int cNext = c;
            if (lamTot > 0.0) {
                double prob = lamTot * dt;
                if (prob > 1.0) {
                    std::ostringstream os;
                    os << "switch probability " << prob << " > 1 on path " << index << " at t=" << t;
                    throw StepTooCoarse(os.str());
                }
                if (prob > opt_.coarseWarn) warn("StepTooCoarse: sum lambda * dt > " + fmt_num(opt_.coarseWarn));
                double u = unif(eng);
                if (u < prob) {
                    double acc = 0.0;
                    int j = -1;
                    for (int jj = 0; jj < K; ++jj) {
                        if (jj == c || lam[jj] <= 0.0) continue;
                        acc += lam[jj] * dt;
                        j = jj;
                        if (u < acc) break;
                    }
                    next += model_.rho(c, j, t, y);
                    cNext = j;
                    p.transitions.push_back({k, t, c, j});
                }
            }

            const std::size_t base = static_cast<std::size_t>(k) * K * K;
            const std::size_t nb = base + static_cast<std::size_t>(K) * K;
            for (int q = 0; q < K * K; ++q) p.comp[nb + q] = p.comp[base + q];
            for (int j = 0; j < K; ++j)
                if (j != c) p.comp[nb + static_cast<std::size_t>(c) * K + j] += lam[j] * dt;

            logB += r * dt;
            if (!next.allFinite() || !std::isfinite(logB)) throw PathBlowup(index, grid_.t(k + 1));
            y = next;
            c = cNext;
            for (int a = 0; a < m; ++a) p.y[static_cast<std::size_t>(k + 1) * m + a] = y(a);
            p.c[k + 1] = c;
            p.bank[k + 1] = std::exp(logB);
        }
    }

private:
    void warn(const std::string& w) const {
        std::lock_guard<std::mutex> lk(mu_);
        warnings_.insert(w);
    }

    const MarketModelSpec& model_;
    Vec y0_;
    int c0_;
    TimeGrid grid_;
    std::uint64_t seed_;
    SimOptions opt_;
    double mass_ = 0.0;
    mutable std::mutex mu_;
    mutable std::set<std::string> warnings_;
};

/// Apply fn(const Path&) to paths 0..n-1 and return the results in path order.
/// Workers take contiguous index blocks; the output does not depend on the
/// worker count.
template <class Fn>
auto map_paths(const PathSimulator& sim, std::size_t n, Fn&& fn) {
    using R = std::decay_t<decltype(fn(std::declval<const Path&>()))>;
    std::vector<R> out(n);
    int workers = std::max(1, sim.options().workers);
    workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(n, 1)));
    if (workers == 1) {
        Path buf;
        for (std::size_t i = 0; i < n; ++i) {
            sim.simulate(i, buf);
            out[i] = fn(static_cast<const Path&>(buf));
        }
        return out;
    }
    std::exception_ptr err;
    std::mutex errMu;
    std::vector<std::thread> pool;
    std::size_t block = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            Path buf;
            std::size_t lo = w * block, hi = std::min(n, lo + block);
            try {
                for (std::size_t i = lo; i < hi; ++i) {
                    sim.simulate(i, buf);
                    out[i] = fn(static_cast<const Path&>(buf));
                }
            } catch (...) {
                std::lock_guard<std::mutex> lk(errMu);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return out;
}

struct PathEnsemble {
    TimeGrid grid;
    std::uint64_t seed = 0;
    int K = 1;
    int m = 0;
    std::vector<Path> paths;
};

inline PathEnsemble simulate_paths(const MarketModelSpec& model, const Vec& y0, int c0, const TimeGrid& grid,
                                   std::size_t nPaths, std::uint64_t seed, SimOptions opt = {}) {
    if (nPaths < 1) throw ConfigError("nPaths must be >= 1");
    PathSimulator sim(model, y0, c0, grid, seed, opt);
    PathEnsemble ens;
    ens.grid = grid;
    ens.seed = seed;
    ens.K = model.K();
    ens.m = model.dim();
    ens.paths = map_paths(sim, nPaths, [](const Path& p) { return p; });
    return ens;
}

/// B recomputed from the path: exp of the left-endpoint Riemann sum of r.
inline std::vector<double> bank_account(const MarketModelSpec& model, const Path& p) {
    std::vector<double> b(p.grid.N + 1, 1.0);
    double logB = 0.0;
    const double dt = p.grid.dt();
    for (int k = 0; k < p.grid.N; ++k) {
        logB += model.rate(p.grid.t(k), p.state(k), p.c[k]) * dt;
        b[k + 1] = std::exp(logB);
    }
    return b;
}

/// H^{ij} and M^{ij} = H^{ij} - int 1_i lambda^{ij} at every grid node.
struct TransitionProcesses {
    int K = 1;
    int N = 0;
    std::vector<int> H;      ///< (N+1) x K x K
    std::vector<double> M;   ///< (N+1) x K x K
    int h(int k, int i, int j) const { return H[(static_cast<std::size_t>(k) * K + i) * K + j]; }
    double mart(int k, int i, int j) const { return M[(static_cast<std::size_t>(k) * K + i) * K + j]; }
};

inline TransitionProcesses transition_processes(const Path& p) {
    TransitionProcesses tp;
    tp.K = p.K;
    tp.N = p.grid.N;
    const std::size_t kk = static_cast<std::size_t>(p.K) * p.K;
    tp.H.assign((p.grid.N + 1) * kk, 0);
    tp.M.assign((p.grid.N + 1) * kk, 0.0);
    std::vector<int> count(kk, 0);
    std::size_t e = 0;
    for (int k = 0; k <= p.grid.N; ++k) {
        // A switch drawn on step k-1 is visible from node k on.
        while (e < p.transitions.size() && p.transitions[e].step < k) {
            count[static_cast<std::size_t>(p.transitions[e].from) * p.K + p.transitions[e].to]++;
            ++e;
        }
        for (std::size_t q = 0; q < kk; ++q) {
            tp.H[k * kk + q] = count[q];
            tp.M[k * kk + q] = count[q] - p.comp[k * kk + q];
        }
    }
    return tp;
}

struct MartingaleFlag {
    std::string quantity;
    Estimate est;
    bool flagged = false;
};

struct DiagnosticReport {
    std::vector<MartingaleFlag> items;
    bool anyFlag() const {
        return std::any_of(items.begin(), items.end(), [](const MartingaleFlag& f) { return f.flagged; });
    }
};

/// Per-path terminal values: S*_T - S*_0 per asset, then M^{ij}_T per ordered pair.
inline std::vector<double> martingale_terminals(const Path& p, int d) {
    std::vector<double> out;
    const int N = p.grid.N;
    for (int a = 0; a < d; ++a) out.push_back(p.coord(N, a) / p.bank[N] - p.coord(0, a) / p.bank[0]);
    const std::size_t base = static_cast<std::size_t>(N) * p.K * p.K;
    std::vector<int> count(static_cast<std::size_t>(p.K) * p.K, 0);
    for (const auto& e : p.transitions) count[static_cast<std::size_t>(e.from) * p.K + e.to]++;
    for (int i = 0; i < p.K; ++i)
        for (int j = 0; j < p.K; ++j)
            if (i != j) out.push_back(count[i * p.K + j] - p.comp[base + i * p.K + j]);
    return out;
}

inline DiagnosticReport martingale_report(const std::vector<std::vector<double>>& terminals, int d, int K,
                                          double nSE = 3.0) {
    DiagnosticReport rep;
    if (terminals.empty()) return rep;
    const std::size_t q = terminals.front().size();
    std::vector<RunningStats> st(q);
    for (const auto& row : terminals)
        for (std::size_t a = 0; a < q; ++a) st[a].add(row[a]);
    std::size_t a = 0;
    for (int k = 0; k < d; ++k, ++a) {
        MartingaleFlag f{"S*_" + std::to_string(k + 1), st[a].estimate(), false};
        f.flagged = std::abs(f.est.mean) > nSE * f.est.se;
        rep.items.push_back(f);
    }
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) {
            if (i == j) continue;
            MartingaleFlag f{"M^{" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "}", st[a++].estimate(), false};
            f.flagged = std::abs(f.est.mean) > nSE * f.est.se;
            rep.items.push_back(f);
        }
    return rep;
}

inline DiagnosticReport martingale_diagnostic(const PathEnsemble& ens, const MarketModelSpec& model, double nSE = 3.0) {
    std::vector<std::vector<double>> rows;
    rows.reserve(ens.paths.size());
    for (const auto& p : ens.paths) rows.push_back(martingale_terminals(p, model.d));
    return martingale_report(rows, model.d, model.K(), nSE);
}

/// Streaming variant: simulates and reduces without keeping paths.
inline DiagnosticReport martingale_diagnostic(const PathSimulator& sim, std::size_t nPaths, double nSE = 3.0) {
    int d = sim.model().d;
    auto rows = map_paths(sim, nPaths, [d](const Path& p) { return martingale_terminals(p, d); });
    return martingale_report(rows, d, sim.model().K(), nSE);
}

/// CSV dump: path,t,Y1..Ym,C,B with C reported 1-based.
inline std::string paths_csv(const PathEnsemble& ens) {
    std::ostringstream os;
    os << "path,t";
    for (int a = 0; a < ens.m; ++a) os << ",Y" << (a + 1);
    os << ",C,B\n";
    for (const auto& p : ens.paths)
        for (int k = 0; k <= p.grid.N; ++k) {
            os << p.index << "," << fmt_num(p.grid.t(k));
            for (int a = 0; a < p.m; ++a) os << "," << fmt_num(p.coord(k, a));
            os << "," << (p.c[k] + 1) << "," << fmt_num(p.bank[k]) << "\n";
        }
    return os.str();
}

inline std::string transitions_csv(const PathEnsemble& ens) {
    std::ostringstream os;
    os << "path,t,i,j\n";
    for (const auto& p : ens.paths)
        for (const auto& e : p.transitions)
            os << p.index << "," << fmt_num(e.t) << "," << (e.from + 1) << "," << (e.to + 1) << "\n";
    return os.str();
}

}  // namespace rmhedge
