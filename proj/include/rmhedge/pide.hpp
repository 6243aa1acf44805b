#pragma once

#include "rmhedge/errors.hpp"
#include "rmhedge/io.hpp"
#include "rmhedge/model.hpp"
#include "rmhedge/value_field.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace rmhedge {

struct PideOptions {
    int storeEvery = 1;  ///< keep every k-th time level (must divide the step count)
    /// Nonlocal shifts beyond the 10% band: continued linearly by default, since
    /// exponential jump maps leave any finite grid near its upper edge.
    EscapePolicy shiftPolicy = EscapePolicy::LinearContinuation;
};

namespace detail {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

/// One regime's operators at one time level.
struct RegimeOperator {
    SpMat A;                      ///< I - dt (L - kill) on PDE rows; extrapolation rows otherwise
    std::vector<char> pdeRow;
    SpMat J;                      ///< int v(z + F) nu
    std::vector<SpMat> R;         ///< lambda^{cj} v_j(z + rho^{cj})
    Eigen::VectorXd src;          ///< g + sum_j delta^{cj} lambda^{cj}
    Eigen::VectorXd disc;         ///< exp(-r dt)
    double maxKill = 0.0;
    std::size_t escapes = 0;
    std::unique_ptr<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>> lu;
};

inline RegimeOperator build_operator(const MarketModelSpec& m, const DividendSpec& div, const SpatialGrid& g, int c,
                                     double t, double dt, EscapePolicy policy) {
    RegimeOperator op;
    const int N = g.size();
    const int K = m.K();
    const int q = g.dims();
    std::vector<Trip> at, jt;
    std::vector<std::vector<Trip>> rt(K);
    op.pdeRow.assign(N, 0);
    op.src = Eigen::VectorXd::Zero(N);
    op.disc = Eigen::VectorXd::Zero(N);
    const double lamMass = m.hasLevy() ? m.levy.totalMass() : 0.0;

    for (int idx = 0; idx < N; ++idx) {
        const Vec z = g.point(idx);
        const auto mi = g.multi(idx);
        const Vec mu = m.compensatedDrift(t, z, c);
        const Mat a = m.rW > 0 ? m.covariance(t, z, c) : Mat::Zero(q, q);
        op.disc(idx) = std::exp(-m.rate(t, z, c) * dt);

        int extrap = -1;
        for (int ax = 0; ax < q && extrap < 0; ++ax) {
            const int i = mi[ax];
            const int n = g.n(ax);
            if (i != 0 && i != n - 1) continue;
            const bool noDiff = std::abs(a(ax, ax)) <= 1e-14 * (1.0 + z.squaredNorm());
            const bool inward = (i == 0) ? mu(ax) >= 0.0 : mu(ax) <= 0.0;
            if (!(noDiff && inward)) extrap = ax;
        }
        auto node_on = [&](int ax, int j) { return ax == 0 ? g.index(j, mi[1]) : g.index(mi[0], j); };

        if (extrap >= 0) {
            // Zero second derivative along the axis in physical coordinates.
            const int ax = extrap;
            const auto& y = g.axis(ax).y;
            const int i = mi[ax];
            const int s = (i == 0) ? 1 : -1;
            const double theta = (y[i + s] - y[i]) / (y[i + 2 * s] - y[i + s]);
            at.emplace_back(idx, idx, 1.0);
            at.emplace_back(idx, node_on(ax, i + s), -(1.0 + theta));
            at.emplace_back(idx, node_on(ax, i + 2 * s), theta);
            continue;
        }
        op.pdeRow[idx] = 1;

        // L v on this row, as (column, coefficient).
        std::vector<std::pair<int, double>> L;
        for (int ax = 0; ax < q; ++ax) {
            const int i = mi[ax];
            const int n = g.n(ax);
            const auto& y = g.axis(ax).y;
            if (i == 0 || i == n - 1) {
                if (mu(ax) == 0.0) continue;
                if (i == 0) {
                    double h = y[1] - y[0];
                    L.emplace_back(node_on(ax, 0), -mu(ax) / h);
                    L.emplace_back(node_on(ax, 1), mu(ax) / h);
                } else {
                    double h = y[n - 1] - y[n - 2];
                    L.emplace_back(node_on(ax, n - 1), mu(ax) / h);
                    L.emplace_back(node_on(ax, n - 2), -mu(ax) / h);
                }
                continue;
            }
            const double hm = y[i] - y[i - 1], hp = y[i + 1] - y[i];
            const auto d1 = g.d1(ax, i);
            const auto d2 = g.d2(ax, i);
            double cm = mu(ax) * d1[0].second + 0.5 * a(ax, ax) * d2[0].second;
            double c0 = mu(ax) * d1[1].second + 0.5 * a(ax, ax) * d2[1].second;
            double cp = mu(ax) * d1[2].second + 0.5 * a(ax, ax) * d2[2].second;
            if (cm < 0.0 || cp < 0.0) {
                // Central drift would break monotonicity here: upwind it.
                cm = 0.5 * a(ax, ax) * d2[0].second;
                c0 = 0.5 * a(ax, ax) * d2[1].second;
                cp = 0.5 * a(ax, ax) * d2[2].second;
                if (mu(ax) > 0.0) {
                    c0 -= mu(ax) / hp;
                    cp += mu(ax) / hp;
                } else {
                    c0 += mu(ax) / hm;
                    cm -= mu(ax) / hm;
                }
            }
            L.emplace_back(node_on(ax, i - 1), cm);
            L.emplace_back(node_on(ax, i), c0);
            L.emplace_back(node_on(ax, i + 1), cp);
        }
        if (q == 2 && a(0, 1) != 0.0 && mi[0] > 0 && mi[0] < g.n(0) - 1 && mi[1] > 0 && mi[1] < g.n(1) - 1) {
            for (auto [i0, w0] : g.d1(0, mi[0]))
                for (auto [i1, w1] : g.d1(1, mi[1])) L.emplace_back(g.index(i0, i1), a(0, 1) * w0 * w1);
        }
        double kill = lamMass;
        double srcv = div.g(t, z, c);
        for (int j = 0; j < K; ++j) {
            if (j == c) continue;
            double l = m.lambda(c, j, t, z);
            if (l == 0.0) continue;
            kill += l;
            srcv += div.delta(c, j, t, z) * l;
            auto st = g.stencil(z + m.rho(c, j, t, z), policy);
            op.escapes += st.escaped;
            for (int s = 0; s < st.count; ++s)
                if (st.w[s] != 0.0) rt[j].emplace_back(idx, st.idx[s], l * st.w[s]);
        }
        op.maxKill = std::max(op.maxKill, kill);
        op.src(idx) = srcv;
        at.emplace_back(idx, idx, 1.0 + dt * kill);
        for (auto [col, coef] : L) at.emplace_back(idx, col, -dt * coef);
        if (lamMass > 0.0) {
            for (const auto& nd : m.levy.nodes()) {
                auto st = g.stencil(z + m.F(t, z, c, nd.x), policy);
                op.escapes += st.escaped;
                for (int s = 0; s < st.count; ++s)
                    if (st.w[s] != 0.0) jt.emplace_back(idx, st.idx[s], nd.w * st.w[s]);
            }
        }
    }
    op.A.resize(N, N);
    op.A.setFromTriplets(at.begin(), at.end());
    op.J.resize(N, N);
    op.J.setFromTriplets(jt.begin(), jt.end());
    op.R.resize(K);
    for (int j = 0; j < K; ++j) {
        op.R[j].resize(N, N);
        op.R[j].setFromTriplets(rt[j].begin(), rt[j].end());
    }
    op.lu = std::make_unique<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>>();
    op.lu->compute(op.A);
    if (op.lu->info() != Eigen::Success) throw SolverDiverged(0, t);
    return op;
}

}  // namespace detail

/// Backward IMEX Euler for (d_t + A - r) v + g + sum_j delta^{cj} lambda^{cj} = 0, v(T) = h.
/// Drift, diffusion and the jump/switch killing are implicit; the shifted terms
/// int v(z+F) nu and lambda v_j(z+rho) are explicit from the later level; the
/// discount enters as the exact factor exp(-r dt).
inline ValueField solve_pide(const MarketModelSpec& m, const DividendSpec& div, const SpatialGrid& grid, double dt,
                             PideOptions opt = {}) {
    if (grid.dims() != m.dim())
        throw ConfigError("PIDE solver needs one grid axis per state coordinate (d+p <= 2)");
    if (!(dt > 0.0)) throw ConfigError("PIDE time step must be > 0");
    const double T = div.maturity;
    const int N = std::max(1, static_cast<int>(std::lround(T / dt)));
    const double h = T / N;
    if (opt.storeEvery < 1 || N % opt.storeEvery != 0)
        throw ConfigError("storeEvery must divide the number of PIDE steps (" + std::to_string(N) + ")");
    const int K = m.K();
    const int S = grid.size();

    std::vector<double> times;
    for (int n = 0; n <= N; n += opt.storeEvery) times.push_back(n == N ? T : n * h);
    ValueField field(grid, K, times);
    field.dt = h;
    field.scheme = "imex-euler";

    std::vector<Eigen::VectorXd> cur(K, Eigen::VectorXd(S)), next(K, Eigen::VectorXd(S));
    for (int c = 0; c < K; ++c)
        for (int i = 0; i < S; ++i) cur[c](i) = div.h(grid.point(i), c);
    const int lastLevel = field.levels() - 1;
    for (int c = 0; c < K; ++c)
        for (int i = 0; i < S; ++i) field.at(lastLevel, c, i) = cur[c](i);

    const bool homogeneous = m.timeHomogeneous && div.timeHomogeneous;
    std::vector<detail::RegimeOperator> ops(K);
    bool warned = false;
    auto build_all = [&](double t) {
        for (int c = 0; c < K; ++c) {
            ops[c] = detail::build_operator(m, div, grid, c, t, h, opt.shiftPolicy);
            field.escapes += ops[c].escapes;
            if (ops[c].maxKill * h > 1.0 && !warned) {
                field.warnings.push_back("explicit nonlocal part: (mass + sum lambda) * dt = " +
                                         fmt_num(ops[c].maxKill * h) + " > 1");
                warned = true;
            }
        }
    };
    if (homogeneous) build_all(0.0);

    Eigen::VectorXd rhs(S);
    for (int n = N - 1; n >= 0; --n) {
        const double t = n * h;
        if (!homogeneous) build_all(t);
        for (int c = 0; c < K; ++c) {
            auto& op = ops[c];
            Eigen::VectorXd expl = op.src;
            if (op.J.nonZeros() > 0) expl += op.J * cur[c];
            for (int j = 0; j < K; ++j)
                if (j != c && op.R[j].nonZeros() > 0) expl += op.R[j] * cur[j];
            for (int i = 0; i < S; ++i) rhs(i) = op.pdeRow[i] ? cur[c](i) + h * expl(i) : 0.0;
            Eigen::VectorXd w = op.lu->solve(rhs);
            next[c] = op.disc.cwiseProduct(w);
            if (!next[c].allFinite()) throw SolverDiverged(static_cast<std::size_t>(n), t);
        }
        std::swap(cur, next);
        if (n % opt.storeEvery == 0) {
            int lv = n / opt.storeEvery;
            for (int c = 0; c < K; ++c)
                for (int i = 0; i < S; ++i) field.at(lv, c, i) = cur[c](i);
        }
    }
    return field;
}

}  // namespace rmhedge
