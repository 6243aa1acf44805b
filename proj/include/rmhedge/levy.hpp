#pragma once

#include "rmhedge/errors.hpp"
#include "rmhedge/types.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace rmhedge {

/// One point of a Levy node table: mark x and its nu-mass.
struct LevyNode {
    Vec x;
    double w = 0.0;
};

struct FiniteAtoms {
    std::vector<LevyNode> atoms;
};

/// Density on a box [lower, upper] (large-jump cutoff) with the ball |x| < epsilon
/// removed. The node table is a tensor Gauss-Legendre rule on `panels` equal
/// panels per axis.
struct QuadratureDensity {
    std::function<double(const Vec&)> density;
    double epsilon = 1e-8;
    Vec lower;
    Vec upper;
    int panels = 6;
};

class LevyMeasure {
public:
    static constexpr unsigned kGaussOrder = 20;

    LevyMeasure() : dim_(1) {}

    /// The zero measure on R^n.
    static LevyMeasure none(int n = 1) {
        LevyMeasure m;
        m.dim_ = n;
        m.rep_ = FiniteAtoms{};
        return m;
    }

    static LevyMeasure atoms(std::vector<LevyNode> atoms) {
        if (atoms.empty()) throw ConfigError("FiniteAtoms needs at least one atom");
        LevyMeasure m;
        m.dim_ = static_cast<int>(atoms.front().x.size());
        for (std::size_t a = 0; a < atoms.size(); ++a) {
            if (atoms[a].x.size() != m.dim_) throw ConfigError("atoms have inconsistent dimension");
            if (!(atoms[a].w > 0.0) || !std::isfinite(atoms[a].w))
                throw ConfigError("atom weights must be strictly positive");
            for (std::size_t b = 0; b < a; ++b)
                if (atoms[a].x == atoms[b].x) throw ConfigError("atoms must be distinct");
        }
        m.nodes_ = atoms;
        m.rep_ = FiniteAtoms{std::move(atoms)};
        m.finish();
        return m;
    }

    static LevyMeasure density(QuadratureDensity q) {
        if (q.lower.size() != q.upper.size() || q.lower.size() == 0)
            throw ConfigError("density box bounds must have equal positive dimension");
        if (!(q.epsilon > 0.0)) throw ConfigError("small-jump truncation epsilon must be > 0");
        if (q.panels < 1) throw ConfigError("density needs at least one panel");
        LevyMeasure m;
        m.dim_ = static_cast<int>(q.lower.size());
        m.nodes_ = build_table(q);
        m.rep_ = std::move(q);
        m.finish();
        return m;
    }

    /// Gaussian density mass * N(mean, sd^2) on R, cut at mean +/- cut*sd.
    static LevyMeasure gaussian(double mean, double sd, double mass, double cut = 10.0, int panels = 6,
                                double epsilon = 1e-8) {
        if (!(sd > 0.0) || !(mass > 0.0)) throw ConfigError("gaussian Levy density needs sd > 0 and mass > 0");
        QuadratureDensity q;
        q.density = [=](const Vec& x) {
            double z = (x(0) - mean) / sd;
            return mass * std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
        };
        q.epsilon = epsilon;
        q.lower = vec({mean - cut * sd});
        q.upper = vec({mean + cut * sd});
        q.panels = panels;
        return density(std::move(q));
    }

    int dim() const { return dim_; }
    bool empty() const { return nodes_.empty(); }
    bool isFiniteAtoms() const { return std::holds_alternative<FiniteAtoms>(rep_); }
    const std::variant<FiniteAtoms, QuadratureDensity>& representation() const { return rep_; }
    const std::vector<LevyNode>& nodes() const { return nodes_; }
    double totalMass() const { return mass_; }

    /// Node index for a uniform draw u in [0,1); marks follow nu/|nu|.
    std::size_t sample_index(double u) const {
        double target = u * mass_;
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
        std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
        return std::min(k, nodes_.size() - 1);
    }

    /// Integral of |x|^2 ^ 1 over the node table.
    double levy_moment() const {
        double s = 0.0;
        for (const auto& nd : nodes_) s += std::min(nd.x.squaredNorm(), 1.0) * nd.w;
        return s;
    }

private:
    static std::vector<LevyNode> build_table(const QuadratureDensity& q) {
        using Rule = boost::math::quadrature::gauss<double, kGaussOrder>;
        // Expand the symmetric half-rule to all points on [-1, 1].
        std::vector<double> gx, gw;
        const auto& ab = Rule::abscissa();
        const auto& wt = Rule::weights();
        for (std::size_t k = 0; k < ab.size(); ++k) {
            if (ab[k] == 0.0) {
                gx.push_back(0.0);
                gw.push_back(wt[k]);
            } else {
                gx.push_back(-ab[k]);
                gw.push_back(wt[k]);
                gx.push_back(ab[k]);
                gw.push_back(wt[k]);
            }
        }
        const int n = static_cast<int>(q.lower.size());
        // Per-axis 1D rule; in 1D the ball (-eps, eps) becomes a panel gap.
        std::vector<std::vector<std::pair<double, double>>> axis(n);
        for (int a = 0; a < n; ++a) {
            std::vector<std::pair<double, double>> segs;
            double lo = q.lower(a), hi = q.upper(a);
            if (n == 1 && lo < -q.epsilon && hi > q.epsilon) {
                segs = {{lo, -q.epsilon}, {q.epsilon, hi}};
            } else {
                segs = {{lo, hi}};
            }
            double total = 0.0;
            for (auto [a0, b0] : segs) total += b0 - a0;
            for (auto [a0, b0] : segs) {
                int p = std::max(1, static_cast<int>(std::lround(q.panels * (b0 - a0) / total)));
                double h = (b0 - a0) / p;
                for (int k = 0; k < p; ++k) {
                    double c = a0 + (k + 0.5) * h;
                    for (std::size_t g = 0; g < gx.size(); ++g)
                        axis[a].push_back({c + 0.5 * h * gx[g], 0.5 * h * gw[g]});
                }
            }
        }
        std::vector<LevyNode> out;
        std::vector<std::size_t> idx(n, 0);
        while (true) {
            Vec x(n);
            double w = 1.0;
            for (int a = 0; a < n; ++a) {
                x(a) = axis[a][idx[a]].first;
                w *= axis[a][idx[a]].second;
            }
            if (x.norm() >= q.epsilon) {
                double dens = q.density(x);
                if (!std::isfinite(dens) || dens < 0.0) {
                    std::ostringstream os;
                    os << "Levy density invalid (" << dens << ") at x=" << x.transpose();
                    throw NumericalDomainError(os.str());
                }
                if (dens * w > 0.0) out.push_back({x, dens * w});
            }
            int a = 0;
            while (a < n && ++idx[a] == axis[a].size()) idx[a++] = 0;
            if (a == n) break;
        }
        return out;
    }

    void finish() {
        cdf_.clear();
        mass_ = 0.0;
        for (const auto& nd : nodes_) {
            mass_ += nd.w;
            cdf_.push_back(mass_);
        }
        if (!std::isfinite(mass_)) throw NumericalDomainError("Levy measure has non-finite mass");
    }

    int dim_;
    std::variant<FiniteAtoms, QuadratureDensity> rep_;
    std::vector<LevyNode> nodes_;
    std::vector<double> cdf_;
    double mass_ = 0.0;
};

namespace detail {
inline bool all_finite(double v) { return std::isfinite(v); }
template <class D>
bool all_finite(const Eigen::MatrixBase<D>& v) { return v.allFinite(); }
}  // namespace detail

/// Integral of f against the measure's node table. f may return a scalar or an
/// Eigen vector/matrix; the zero measure yields a zero of the shape of f(0).
template <class F>
auto integrate_levy(const LevyMeasure& m, F&& f) {
    using R = std::decay_t<decltype(f(std::declval<const Vec&>()))>;
    const auto& nodes = m.nodes();
    if (nodes.empty()) {
        if constexpr (std::is_arithmetic_v<R>) {
            return R{0};
        } else {
            R probe = f(Vec::Zero(m.dim()));
            probe.setZero();
            return probe;
        }
    }
    R acc{};
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        R val = f(nodes[k].x);
        if (!detail::all_finite(val)) {
            std::ostringstream os;
            os << "non-finite integrand at Levy node " << k << " (x=" << nodes[k].x.transpose() << ")";
            throw NumericalDomainError(os.str());
        }
        if (k == 0) {
            acc = nodes[k].w * val;
        } else {
            acc += nodes[k].w * val;
        }
    }
    return acc;
}

}  // namespace rmhedge
