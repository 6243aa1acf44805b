#pragma once

#include "rmhedge/errors.hpp"
#include "rmhedge/generator.hpp"
#include "rmhedge/io.hpp"
#include "rmhedge/model.hpp"
#include "rmhedge/validate.hpp"
#include "rmhedge/value_field.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace rmhedge {

/// G = a_SS + int F_S F_S^T nu + sum_j rho_S rho_S^T lambda, kept by blocks.
struct GramMatrix {
    Mat diffusion;
    Mat jump;
    Mat regime;
    Mat total() const {
        Mat g = diffusion + jump + regime;
        return 0.5 * (g + g.transpose());
    }
};

inline GramMatrix gram_matrix(const MarketModelSpec& m, double u, const Vec& z, int i) {
    const int d = m.d;
    GramMatrix G;
    G.diffusion = Mat::Zero(d, d);
    G.jump = Mat::Zero(d, d);
    G.regime = Mat::Zero(d, d);
    if (m.rW > 0) {
        Mat s = m.diffusion(u, z, i).topRows(d);
        G.diffusion = s * s.transpose();
    }
    if (m.hasLevy()) {
        G.jump = integrate_levy(m.levy, [&](const Vec& x) -> Mat {
            Vec f = m.F(u, z, i, x).head(d);
            return f * f.transpose();
        });
    }
    for (int j = 0; j < m.K(); ++j) {
        if (j == i) continue;
        double l = m.lambda(i, j, u, z);
        if (l == 0.0) continue;
        Vec r = m.rho(i, j, u, z).head(d);
        G.regime += l * r * r.transpose();
    }
    G.diffusion = 0.5 * (G.diffusion + G.diffusion.transpose());
    G.jump = 0.5 * (G.jump + G.jump.transpose());
    G.regime = 0.5 * (G.regime + G.regime.transpose());
    return G;
}

struct MinNormSolution {
    Vec phi;
    double residual = 0.0;
    int rank = 0;
};

/// phi = G^+ A through the eigendecomposition of G; eigenvalues at or below
/// 1e-12 * lambda_max are treated as zero.
inline MinNormSolution min_norm_solve(const Mat& G, const Vec& A, double relTol = 1e-12) {
    MinNormSolution out;
    const int d = static_cast<int>(G.rows());
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (G + G.transpose()));
    const Vec ev = es.eigenvalues();
    const Mat U = es.eigenvectors();
    const double lmax = d > 0 ? ev.cwiseAbs().maxCoeff() : 0.0;
    const double cut = relTol * lmax;
    Vec coef = U.transpose() * A;
    out.phi = Vec::Zero(d);
    for (int k = 0; k < d; ++k) {
        if (lmax > 0.0 && ev(k) > cut) {
            out.phi += (coef(k) / ev(k)) * U.col(k);
            ++out.rank;
        }
    }
    out.residual = (G * out.phi - A).norm();
    return out;
}

/// Representation of X = int B^{-1} dD at one point: delta in R^{rW}, J at the
/// Levy nodes, gamma^{ij} for the active regime i (entry i unused).
struct RepresentationTriple {
    int regime = 0;
    Vec delta;
    std::vector<double> J;
    std::vector<double> gamma;
};

/// Shifted value v(u, z', c), honouring the field's escape policy.
template <ValueSource V>
double shifted_value(const V& v, double u, const Vec& z, int c, EscapePolicy) {
    return v.value(u, z, c);
}
inline double shifted_value(const ValueField& v, double u, const Vec& z, int c, EscapePolicy policy) {
    return v.value(u, z, c, policy);
}

template <ValueSource V>
RepresentationTriple representation_triple(const MarketModelSpec& m, const DividendSpec& div, const V& v, double u,
                                           const Vec& z, int i, double B = 1.0,
                                           EscapePolicy policy = EscapePolicy::Throw) {
    RepresentationTriple tr;
    tr.regime = i;
    const double v0 = v.value(u, z, i);
    if (m.rW > 0) {
        Vec g = v.gradient(u, z, i);
        tr.delta = m.diffusion(u, z, i).transpose() * g / B;
    } else {
        tr.delta = Vec::Zero(0);
    }
    if (m.hasLevy()) {
        const auto& nodes = m.levy.nodes();
        tr.J.resize(nodes.size());
        for (std::size_t q = 0; q < nodes.size(); ++q)
            tr.J[q] = (shifted_value(v, u, z + m.F(u, z, i, nodes[q].x), i, policy) - v0) / B;
    }
    tr.gamma.assign(m.K(), 0.0);
    for (int j = 0; j < m.K(); ++j) {
        if (j == i) continue;
        tr.gamma[j] = (shifted_value(v, u, z + m.rho(i, j, u, z), j, policy) - v0 + div.delta(i, j, u, z)) / B;
    }
    return tr;
}

/// A assembled from derivatives and value differences of v.
template <ValueSource V>
Vec cross_vector(const MarketModelSpec& m, const DividendSpec& div, const V& v, double u, const Vec& z, int i,
                 EscapePolicy policy = EscapePolicy::Throw) {
    const int d = m.d;
    Vec A = Vec::Zero(d);
    const double v0 = v.value(u, z, i);
    if (m.rW > 0) {
        Mat s = m.diffusion(u, z, i);
        Mat a = s * s.transpose();
        Vec g = v.gradient(u, z, i);
        // a_SS grad_S v + a_SR grad_R v
        A += a.topRows(d) * g;
    }
    if (m.hasLevy()) {
        A += integrate_levy(m.levy, [&](const Vec& x) -> Vec {
            Vec f = m.F(u, z, i, x);
            return Vec(f.head(d) * (shifted_value(v, u, z + f, i, policy) - v0));
        });
    }
    for (int j = 0; j < m.K(); ++j) {
        if (j == i) continue;
        double l = m.lambda(i, j, u, z);
        if (l == 0.0) continue;
        Vec r = m.rho(i, j, u, z);
        A += r.head(d) * ((shifted_value(v, u, z + r, j, policy) - v0 + div.delta(i, j, u, z)) * l);
    }
    return A;
}

/// A = B (sigma_S delta + int F_S J nu + sum_j rho_S gamma lambda); equals cross_vector
/// when the triple comes from the same v.
inline Vec cross_vector_from_triple(const MarketModelSpec& m, double u, const Vec& z, const RepresentationTriple& tr,
                                    double B = 1.0) {
    const int d = m.d;
    const int i = tr.regime;
    Vec A = Vec::Zero(d);
    if (m.rW > 0) A += m.diffusion(u, z, i).topRows(d) * tr.delta;
    if (m.hasLevy()) {
        const auto& nodes = m.levy.nodes();
        for (std::size_t q = 0; q < nodes.size(); ++q) A += nodes[q].w * tr.J[q] * m.F(u, z, i, nodes[q].x).head(d);
    }
    for (int j = 0; j < m.K(); ++j) {
        if (j == i) continue;
        double l = m.lambda(i, j, u, z);
        if (l == 0.0) continue;
        A += m.rho(i, j, u, z).head(d) * (tr.gamma[j] * l);
    }
    return B * A;
}

/// Add the loadings of a semimartingale payment stream to the triple of its
/// absolutely continuous part.
inline RepresentationTriple semimartingale_adjust(const MarketModelSpec& m, const SemimartingaleDividendSpec& sd,
                                                  const RepresentationTriple& hat, double u, const Vec& z, double B) {
    RepresentationTriple out = hat;
    const int i = hat.regime;
    if (m.rW > 0) {
        if (out.delta.size() != m.rW) out.delta = Vec::Zero(m.rW);
        out.delta += sd.deltaD(u, z, i, m.rW) / B;
    }
    if (m.hasLevy()) {
        const auto& nodes = m.levy.nodes();
        out.J.resize(nodes.size(), 0.0);
        for (std::size_t q = 0; q < nodes.size(); ++q) out.J[q] += sd.JD(u, z, i, nodes[q].x) / B;
    }
    out.gamma.resize(m.K(), 0.0);
    for (int j = 0; j < m.K(); ++j)
        if (j != i) out.gamma[j] += sd.gammaD(i, j, u, z) / B;
    return out;
}

/// Integrand of the residual risk split by source; sigma, F, rho are the asset
/// loadings divided by B.
struct RiskDensity {
    double brownian = 0.0;
    double jump = 0.0;
    double regime = 0.0;
    double total() const { return brownian + jump + regime; }
};

inline RiskDensity risk_density(const MarketModelSpec& m, double u, const Vec& z, const RepresentationTriple& tr,
                                const Vec& phi, double B = 1.0) {
    RiskDensity rd;
    const int d = m.d;
    const int i = tr.regime;
    if (m.rW > 0) rd.brownian = (tr.delta - m.diffusion(u, z, i).topRows(d).transpose() * phi / B).squaredNorm();
    if (m.hasLevy()) {
        const auto& nodes = m.levy.nodes();
        for (std::size_t q = 0; q < nodes.size(); ++q) {
            double e = tr.J[q] - phi.dot(m.F(u, z, i, nodes[q].x).head(d)) / B;
            rd.jump += nodes[q].w * e * e;
        }
    }
    for (int j = 0; j < m.K(); ++j) {
        if (j == i) continue;
        double l = m.lambda(i, j, u, z);
        if (l == 0.0) continue;
        double e = tr.gamma[j] - phi.dot(m.rho(i, j, u, z).head(d)) / B;
        rd.regime += l * e * e;
    }
    return rd;
}

struct HedgePoint {
    Vec phi;
    Vec A;
    Mat G;
    int rank = 0;
    double residual = 0.0;
    RepresentationTriple triple;
    RiskDensity density;  ///< undiscounted (B = 1)
};

/// Strategy and risk density at one point, with B = 1 (undiscounted units).
template <ValueSource V>
HedgePoint hedge_at(const MarketModelSpec& m, const DividendSpec& div, const V& v, double u, const Vec& z, int c,
                    EscapePolicy policy = EscapePolicy::Throw, const SemimartingaleDividendSpec* sd = nullptr) {
    HedgePoint hp;
    hp.triple = representation_triple(m, div, v, u, z, c, 1.0, policy);
    if (sd) hp.triple = semimartingale_adjust(m, *sd, hp.triple, u, z, 1.0);
    hp.G = gram_matrix(m, u, z, c).total();
    hp.A = sd ? cross_vector_from_triple(m, u, z, hp.triple) : cross_vector(m, div, v, u, z, c, policy);
    auto sol = min_norm_solve(hp.G, hp.A);
    hp.phi = sol.phi;
    hp.rank = sol.rank;
    hp.residual = sol.residual;
    hp.density = risk_density(m, u, z, hp.triple, hp.phi);
    return hp;
}

/// phi, eta, solver metadata and risk density tabulated on the value field's
/// levels and nodes.
class HedgeField {
public:
    HedgeField() = default;

    const SpatialGrid& grid() const { return grid_; }
    const std::vector<double>& times() const { return times_; }
    int K() const { return K_; }
    int d() const { return d_; }
    std::size_t escapes = 0;
    EscapePolicy queryPolicy = EscapePolicy::Throw;

    const double* phi_at(int lv, int c, int node) const { return &phi_[slot(lv, c, node) * d_]; }
    double eta_at(int lv, int c, int node) const { return eta_[slot(lv, c, node)]; }
    int rank_at(int lv, int c, int node) const { return rank_[slot(lv, c, node)]; }
    double residual_at(int lv, int c, int node) const { return resid_[slot(lv, c, node)]; }
    const RiskDensity& density_at(int lv, int c, int node) const { return dens_[slot(lv, c, node)]; }

    /// Linear interpolation in time and space; the band policy is queryPolicy.
    Vec phi(double t, const Vec& y, int c) const {
        auto [k, w] = bracket(t);
        Vec out = level_phi(k, y, c);
        if (w != 0.0) out = (1 - w) * out + w * level_phi(k + 1, y, c);
        return out;
    }
    RiskDensity density(double t, const Vec& y, int c) const {
        auto [k, w] = bracket(t);
        RiskDensity a = level_density(k, y, c);
        if (w != 0.0) {
            RiskDensity b = level_density(k + 1, y, c);
            a.brownian = (1 - w) * a.brownian + w * b.brownian;
            a.jump = (1 - w) * a.jump + w * b.jump;
            a.regime = (1 - w) * a.regime + w * b.regime;
        }
        return a;
    }

    /// CSV: t, y..., c, phi_1..phi_d, eta, rank, residual (c 1-based).
    std::string to_csv() const {
        std::ostringstream os;
        os << "t";
        for (int a = 0; a < grid_.dims(); ++a) os << ",y" << (a + 1);
        os << ",c";
        for (int k = 0; k < d_; ++k) os << ",phi" << (k + 1);
        os << ",eta,rank,residual\n";
        for (int lv = 0; lv < static_cast<int>(times_.size()); ++lv)
            for (int c = 0; c < K_; ++c)
                for (int i = 0; i < grid_.size(); ++i) {
                    Vec z = grid_.point(i);
                    os << fmt_num(times_[lv]);
                    for (int a = 0; a < grid_.dims(); ++a) os << "," << fmt_num(z(a));
                    os << "," << (c + 1);
                    const double* p = phi_at(lv, c, i);
                    for (int k = 0; k < d_; ++k) os << "," << fmt_num(p[k]);
                    os << "," << fmt_num(eta_at(lv, c, i)) << "," << rank_at(lv, c, i) << ","
                       << fmt_num(residual_at(lv, c, i)) << "\n";
                }
        return os.str();
    }

    friend HedgeField hedge_field(const MarketModelSpec& m, const DividendSpec& div, const ValueField& v,
                                  EscapePolicy policy);

private:
    std::size_t slot(int lv, int c, int node) const {
        return (static_cast<std::size_t>(lv) * K_ + c) * grid_.size() + node;
    }
    std::pair<int, double> bracket(double t) const {
        const double tol = 1e-12 * std::max(1.0, std::abs(times_.back()));
        if (t < times_.front() - tol || t > times_.back() + tol) throw DomainEscape("hedge field time out of range");
        if (times_.size() == 1) return {0, 0.0};
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        int k = std::clamp(static_cast<int>(it - times_.begin()) - 1, 0, static_cast<int>(times_.size()) - 2);
        if (std::abs(t - times_[k]) <= tol) return {k, 0.0};
        if (std::abs(t - times_[k + 1]) <= tol) return {k + 1, 0.0};
        return {k, (t - times_[k]) / (times_[k + 1] - times_[k])};
    }
    Vec level_phi(int lv, const Vec& y, int c) const {
        auto st = grid_.stencil(y, queryPolicy);
        Vec out = Vec::Zero(d_);
        for (int q = 0; q < st.count; ++q) {
            const double* p = phi_at(lv, c, st.idx[q]);
            for (int k = 0; k < d_; ++k) out(k) += st.w[q] * p[k];
        }
        return out;
    }
    RiskDensity level_density(int lv, const Vec& y, int c) const {
        auto st = grid_.stencil(y, queryPolicy);
        RiskDensity r;
        for (int q = 0; q < st.count; ++q) {
            const auto& e = density_at(lv, c, st.idx[q]);
            r.brownian += st.w[q] * e.brownian;
            r.jump += st.w[q] * e.jump;
            r.regime += st.w[q] * e.regime;
        }
        return r;
    }

    SpatialGrid grid_;
    std::vector<double> times_;
    int K_ = 1;
    int d_ = 1;
    std::vector<double> phi_;
    std::vector<double> eta_;
    std::vector<int> rank_;
    std::vector<double> resid_;
    std::vector<RiskDensity> dens_;
};

/// Nodewise strategy from a solved value field. Gradients are the field's
/// three-point nodal differences; shifts are interpolated on the same level.
/// phi at t = T is the left limit (copied from the level before T). eta uses
/// the deterministic bank account accumulated at the frozen node.
inline HedgeField hedge_field(const MarketModelSpec& m, const DividendSpec& div, const ValueField& v,
                              EscapePolicy policy = EscapePolicy::LinearContinuation) {
    HedgeField hf;
    hf.grid_ = v.grid();
    hf.times_ = v.times();
    hf.K_ = v.K();
    hf.d_ = m.d;
    const int L = static_cast<int>(hf.times_.size());
    const int S = hf.grid_.size();
    const std::size_t slots = static_cast<std::size_t>(L) * hf.K_ * S;
    hf.phi_.assign(slots * m.d, 0.0);
    hf.eta_.assign(slots, 0.0);
    hf.rank_.assign(slots, 0);
    hf.resid_.assign(slots, 0.0);
    hf.dens_.assign(slots, RiskDensity{});
    const double T = hf.times_.back();

    // Per (regime, node) coefficients; rebuilt per level only for
    // time-dependent models.
    struct Shift {
        SpatialGrid::Stencil st;
        Vec FS;
        double w = 0.0;
    };
    struct NodeCache {
        Mat G;
        Mat sigY;  // (d+p) x rW
        std::vector<Shift> levy;
        std::vector<Shift> reg;  // w = lambda, entry j
        std::vector<double> pay;
    };
    const bool homogeneous = m.timeHomogeneous && div.timeHomogeneous;
    std::vector<NodeCache> cache(static_cast<std::size_t>(hf.K_) * S);
    auto build = [&](double t) {
        for (int c = 0; c < hf.K_; ++c)
            for (int i = 0; i < S; ++i) {
                NodeCache& nc = cache[static_cast<std::size_t>(c) * S + i];
                const Vec z = hf.grid_.point(i);
                nc.G = gram_matrix(m, t, z, c).total();
                if (m.rW > 0) nc.sigY = m.diffusion(t, z, c);
                nc.levy.clear();
                if (m.hasLevy())
                    for (const auto& nd : m.levy.nodes()) {
                        Vec f = m.F(t, z, c, nd.x);
                        Shift sh{hf.grid_.stencil(z + f, policy), f.head(m.d), nd.w};
                        hf.escapes += sh.st.escaped;
                        nc.levy.push_back(sh);
                    }
                nc.reg.assign(hf.K_, Shift{});
                nc.pay.assign(hf.K_, 0.0);
                for (int j = 0; j < hf.K_; ++j) {
                    if (j == c) continue;
                    double l = m.lambda(c, j, t, z);
                    if (l == 0.0) continue;
                    Vec r = m.rho(c, j, t, z);
                    nc.reg[j] = Shift{hf.grid_.stencil(z + r, policy), r.head(m.d), l};
                    nc.pay[j] = div.delta(c, j, t, z);
                }
            }
    };
    if (homogeneous) build(0.0);

    std::vector<double> logB(static_cast<std::size_t>(hf.K_) * S, 0.0);
    for (int lv = 0; lv < L; ++lv) {
        const double t = hf.times_[lv];
        const bool terminal = (lv == L - 1) && L > 1;
        if (!homogeneous && !terminal) build(t);
        if (lv > 0)
            for (int c = 0; c < hf.K_; ++c)
                for (int i = 0; i < S; ++i)
                    logB[static_cast<std::size_t>(c) * S + i] +=
                        m.rate(hf.times_[lv - 1], hf.grid_.point(i), c) * (t - hf.times_[lv - 1]);
        for (int c = 0; c < hf.K_; ++c) {
            const double* sh = v.sheet(lv, c);
            auto shifted = [&](const SpatialGrid::Stencil& st, int sheetC) {
                const double* q = v.sheet(lv, sheetC);
                double a = 0.0;
                for (int k = 0; k < st.count; ++k) a += st.w[k] * q[st.idx[k]];
                return a;
            };
            for (int i = 0; i < S; ++i) {
                const std::size_t s = hf.slot(lv, c, i);
                const Vec z = hf.grid_.point(i);
                if (terminal) {
                    const std::size_t prev = hf.slot(lv - 1, c, i);
                    for (int k = 0; k < m.d; ++k) hf.phi_[s * m.d + k] = hf.phi_[prev * m.d + k];
                    hf.rank_[s] = hf.rank_[prev];
                    hf.resid_[s] = hf.resid_[prev];
                    hf.dens_[s] = hf.dens_[prev];
                } else {
                    const NodeCache& nc = cache[static_cast<std::size_t>(c) * S + i];
                    const double v0 = sh[i];
                    RepresentationTriple tr;
                    tr.regime = c;
                    Vec A = Vec::Zero(m.d);
                    Mat sigS;
                    if (m.rW > 0) {
                        tr.delta = nc.sigY.transpose() * v.node_gradient(lv, c, i);
                        sigS = nc.sigY.topRows(m.d);
                        A += sigS * tr.delta;
                    }
                    tr.J.resize(nc.levy.size());
                    for (std::size_t q = 0; q < nc.levy.size(); ++q) {
                        tr.J[q] = shifted(nc.levy[q].st, c) - v0;
                        A += (nc.levy[q].w * tr.J[q]) * nc.levy[q].FS;
                    }
                    tr.gamma.assign(hf.K_, 0.0);
                    for (int j = 0; j < hf.K_; ++j) {
                        if (j == c || nc.reg[j].w == 0.0) continue;
                        tr.gamma[j] = shifted(nc.reg[j].st, j) - v0 + nc.pay[j];
                        A += (nc.reg[j].w * tr.gamma[j]) * nc.reg[j].FS;
                    }
                    auto sol = min_norm_solve(nc.G, A);
                    RiskDensity rd;
                    if (m.rW > 0) rd.brownian = (tr.delta - sigS.transpose() * sol.phi).squaredNorm();
                    for (std::size_t q = 0; q < nc.levy.size(); ++q) {
                        double e = tr.J[q] - sol.phi.dot(nc.levy[q].FS);
                        rd.jump += nc.levy[q].w * e * e;
                    }
                    for (int j = 0; j < hf.K_; ++j) {
                        if (j == c || nc.reg[j].w == 0.0) continue;
                        double e = tr.gamma[j] - sol.phi.dot(nc.reg[j].FS);
                        rd.regime += nc.reg[j].w * e * e;
                    }
                    for (int k = 0; k < m.d; ++k) hf.phi_[s * m.d + k] = sol.phi(k);
                    hf.rank_[s] = sol.rank;
                    hf.resid_[s] = sol.residual;
                    hf.dens_[s] = rd;
                }
                double vv = (t < T) ? v.at(lv, c, i) : 0.0;
                double stock = 0.0;
                for (int k = 0; k < m.d; ++k) stock += hf.phi_[s * m.d + k] * z(k);
                hf.eta_[s] = (vv - stock) / std::exp(logB[static_cast<std::size_t>(c) * S + i]);
            }
        }
    }
    return hf;
}

/// Delta hedge of switching risk: in regime i solve the (K-1) x d system
/// rho_S^{ij} phi = Delta_{ij} v + delta^{ij} in the least-squares minimum-norm sense.
struct CreditHedgeRow {
    double t = 0.0;
    Vec z;
    int regime = 0;
    Vec phi;
    double residual = 0.0;
};

template <ValueSource V>
std::vector<CreditHedgeRow> credit_delta_hedge(const MarketModelSpec& m, const DividendSpec& div, const V& v,
                                               const std::vector<Probe>& probes,
                                               EscapePolicy policy = EscapePolicy::Throw) {
    std::vector<CreditHedgeRow> out;
    const int K = m.K();
    for (const auto& pr : probes) {
        const int i = pr.c;
        Eigen::MatrixXd P(K - 1, m.d);
        Eigen::VectorXd rhs(K - 1);
        const double v0 = v.value(pr.u, pr.z, i);
        int row = 0;
        for (int j = 0; j < K; ++j) {
            if (j == i) continue;
            Vec r = m.rho(i, j, pr.u, pr.z);
            P.row(row) = r.head(m.d).transpose();
            rhs(row) = shifted_value(v, pr.u, pr.z + r, j, policy) - v0 + div.delta(i, j, pr.u, pr.z);
            ++row;
        }
        CreditHedgeRow cr;
        cr.t = pr.u;
        cr.z = pr.z;
        cr.regime = i;
        if (K > 1) {
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(P);
            cod.setThreshold(1e-12);
            Eigen::VectorXd x = cod.solve(rhs);
            cr.phi = Vec(x);
            cr.residual = (P * x - rhs).norm();
        } else {
            cr.phi = Vec::Zero(m.d);
        }
        out.push_back(cr);
    }
    return out;
}

enum class Verdict { Yes, No, Indeterminate };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Yes: return "attainable";
        case Verdict::No: return "not_attainable";
        default: return "indeterminate";
    }
}

struct RankRow {
    std::size_t probe = 0;
    int regime = 0;
    int rank = 0;
    int required = 0;
};

struct AttainabilityReport {
    Verdict verdict = Verdict::Indeterminate;
    std::string reason;
    bool necessaryHolds = false;  ///< d >= rW + q + K - 1
    int required = 0;
    std::vector<RankRow> table;
};

/// Rank of L^i = [sigma_S | F_S(x_1..x_q) | rho_S^{ij}, j != i] at every probe.
inline AttainabilityReport attainability_check(const MarketModelSpec& m, const SamplePlan& plan) {
    AttainabilityReport rep;
    if (!m.levy.empty() && !m.levy.isFiniteAtoms()) {
        rep.reason = "Levy measure is not finitely supported";
        return rep;
    }
    const int q = m.hasLevy() ? static_cast<int>(m.levy.nodes().size()) : 0;
    const int K = m.K();
    rep.required = m.rW + q + K - 1;
    rep.necessaryHolds = m.d >= rep.required;
    bool all = true;
    for (std::size_t p = 0; p < plan.probes.size(); ++p) {
        const auto& pr = plan.probes[p];
        Eigen::MatrixXd L(m.d, rep.required);
        int col = 0;
        if (m.rW > 0) {
            Mat s = m.diffusion(pr.u, pr.z, pr.c).topRows(m.d);
            for (int a = 0; a < m.rW; ++a) L.col(col++) = s.col(a);
        }
        for (int k = 0; k < q; ++k) L.col(col++) = m.F(pr.u, pr.z, pr.c, m.levy.nodes()[k].x).head(m.d);
        for (int j = 0; j < K; ++j)
            if (j != pr.c) L.col(col++) = m.rho(pr.c, j, pr.u, pr.z).head(m.d);
        int rank = 0;
        if (L.size() > 0) {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(L);
            const auto& sv = svd.singularValues();
            const double smax = sv.size() ? sv(0) : 0.0;
            for (int k = 0; k < sv.size(); ++k)
                if (smax > 0.0 && sv(k) > 1e-12 * smax) ++rank;
        }
        rep.table.push_back({p, pr.c, rank, rep.required});
        if (rank != rep.required) all = false;
    }
    rep.verdict = all ? Verdict::Yes : Verdict::No;
    rep.reason = all ? "full rank at every probe"
                     : (rep.necessaryHolds ? "rank deficient at some probe" : "too few assets: d < rW + q + K - 1");
    return rep;
}

}  // namespace rmhedge
