#pragma once

#include "rmhedge/errors.hpp"
#include "rmhedge/io.hpp"
#include "rmhedge/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace rmhedge {

/// What happens to a query beyond the 10% extrapolation band.
enum class EscapePolicy {
    Throw,               ///< DomainEscape
    LinearContinuation,  ///< keep extrapolating linearly from the edge interval
};

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    int nodes = 8;
    bool log = false;  ///< nodes uniform in log(y)
    std::vector<double> y;

    Axis() = default;
    Axis(double lo_, double hi_, int n, bool logScale = false) : lo(lo_), hi(hi_), nodes(n), log(logScale) {
        if (n < 8) throw ConfigError("grid axes need at least 8 nodes");
        if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("grid axis bounds must be finite with lo < hi");
        if (log && !(lo > 0.0)) throw ConfigError("log-scaled axis needs lo > 0");
        y.resize(n);
        for (int i = 0; i < n; ++i) {
            double f = static_cast<double>(i) / (n - 1);
            y[i] = log ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))) : lo + f * (hi - lo);
        }
        y.front() = lo;
        y.back() = hi;
    }
    double span() const { return hi - lo; }
};

/// Index of the left node of the interval used for q and the linear weight of
/// the right node; weights outside [0,1] mean extrapolation.
struct AxisLocation {
    int i = 0;
    double w = 0.0;
    bool escaped = false;
};

class SpatialGrid {
public:
    SpatialGrid() = default;
    explicit SpatialGrid(std::vector<Axis> axes) : axes_(std::move(axes)) {
        if (axes_.empty() || axes_.size() > 2) throw ConfigError("spatial grid supports 1 or 2 axes");
        size_ = 1;
        for (const auto& a : axes_) size_ *= a.nodes;
    }

    int dims() const { return static_cast<int>(axes_.size()); }
    int size() const { return size_; }
    const Axis& axis(int a) const { return axes_[a]; }
    const std::vector<Axis>& axes() const { return axes_; }
    int n(int a) const { return axes_[a].nodes; }

    int index(int i0, int i1 = 0) const { return i0 + (dims() > 1 ? axes_[0].nodes * i1 : 0); }
    std::array<int, 2> multi(int idx) const {
        if (dims() == 1) return {idx, 0};
        return {idx % axes_[0].nodes, idx / axes_[0].nodes};
    }
    Vec point(int idx) const {
        auto mi = multi(idx);
        Vec z(dims());
        for (int a = 0; a < dims(); ++a) z(a) = axes_[a].y[mi[a]];
        return z;
    }

    /// Locate q on axis a; beyond lo/hi -/+ 10% of the span the policy decides.
    AxisLocation locate(int a, double q, EscapePolicy policy) const {
        const Axis& ax = axes_[a];
        AxisLocation loc;
        const double band = 0.1 * ax.span();
        if (!std::isfinite(q)) throw DomainEscape("non-finite query on axis " + std::to_string(a + 1));
        if (q < ax.lo - band || q > ax.hi + band) {
            loc.escaped = true;
            if (policy == EscapePolicy::Throw) {
                std::ostringstream os;
                os << "query " << q << " on axis " << (a + 1) << " beyond [" << ax.lo - band << ", " << ax.hi + band
                   << "]";
                throw DomainEscape(os.str());
            }
        }
        int i;
        if (q <= ax.lo) {
            i = 0;
        } else if (q >= ax.hi) {
            i = ax.nodes - 2;
        } else if (ax.log) {
            double f = (std::log(q) - std::log(ax.lo)) / (std::log(ax.hi) - std::log(ax.lo)) * (ax.nodes - 1);
            i = std::clamp(static_cast<int>(f), 0, ax.nodes - 2);
            while (i > 0 && q < ax.y[i]) --i;
            while (i < ax.nodes - 2 && q >= ax.y[i + 1]) ++i;
        } else {
            double f = (q - ax.lo) / ax.span() * (ax.nodes - 1);
            i = std::clamp(static_cast<int>(f), 0, ax.nodes - 2);
            while (i > 0 && q < ax.y[i]) --i;
            while (i < ax.nodes - 2 && q >= ax.y[i + 1]) ++i;
        }
        loc.i = i;
        loc.w = (q - ax.y[i]) / (ax.y[i + 1] - ax.y[i]);
        return loc;
    }

    struct Stencil {
        std::array<int, 4> idx{};
        std::array<double, 4> w{};
        int count = 0;
        bool escaped = false;
    };

    /// Multilinear weights in physical coordinates; exact for affine fields.
    Stencil stencil(const Vec& q, EscapePolicy policy) const {
        Stencil s;
        if (q.size() != dims()) throw DomainEscape("query dimension does not match grid");
        AxisLocation l0 = locate(0, q(0), policy);
        s.escaped = l0.escaped;
        if (dims() == 1) {
            s.idx = {l0.i, l0.i + 1, 0, 0};
            s.w = {1.0 - l0.w, l0.w, 0.0, 0.0};
            s.count = 2;
            return s;
        }
        AxisLocation l1 = locate(1, q(1), policy);
        s.escaped = s.escaped || l1.escaped;
        s.idx = {index(l0.i, l1.i), index(l0.i + 1, l1.i), index(l0.i, l1.i + 1), index(l0.i + 1, l1.i + 1)};
        s.w = {(1 - l0.w) * (1 - l1.w), l0.w * (1 - l1.w), (1 - l0.w) * l1.w, l0.w * l1.w};
        s.count = 4;
        return s;
    }

    /// Three-point first-derivative weights on axis a at node i (one-sided at edges).
    std::array<std::pair<int, double>, 3> d1(int a, int i) const {
        const auto& y = axes_[a].y;
        const int n = axes_[a].nodes;
        if (i == 0) {
            double h1 = y[1] - y[0], h2 = y[2] - y[1];
            return {{{0, -(2 * h1 + h2) / (h1 * (h1 + h2))}, {1, (h1 + h2) / (h1 * h2)}, {2, -h1 / (h2 * (h1 + h2))}}};
        }
        if (i == n - 1) {
            double h1 = y[n - 1] - y[n - 2], h2 = y[n - 2] - y[n - 3];
            return {{{n - 1, (2 * h1 + h2) / (h1 * (h1 + h2))}, {n - 2, -(h1 + h2) / (h1 * h2)}, {n - 3, h1 / (h2 * (h1 + h2))}}};
        }
        double hm = y[i] - y[i - 1], hp = y[i + 1] - y[i];
        return {{{i - 1, -hp / (hm * (hm + hp))}, {i, (hp - hm) / (hm * hp)}, {i + 1, hm / (hp * (hm + hp))}}};
    }

    /// Three-point second-derivative weights (edge rows reuse the adjacent interior stencil).
    std::array<std::pair<int, double>, 3> d2(int a, int i) const {
        const auto& y = axes_[a].y;
        const int n = axes_[a].nodes;
        int c = std::clamp(i, 1, n - 2);
        double hm = y[c] - y[c - 1], hp = y[c + 1] - y[c];
        return {{{c - 1, 2.0 / (hm * (hm + hp))}, {c, -2.0 / (hm * hp)}, {c + 1, 2.0 / (hp * (hm + hp))}}};
    }

private:
    std::vector<Axis> axes_;
    int size_ = 0;
};

/// v(t_k, node, c) on stored time levels, one sheet per regime.
class ValueField {
public:
    ValueField() = default;
    ValueField(SpatialGrid grid, int K, std::vector<double> times)
        : grid_(std::move(grid)), K_(K), times_(std::move(times)) {
        data_.assign(times_.size() * static_cast<std::size_t>(K_) * grid_.size(), 0.0);
    }

    const SpatialGrid& grid() const { return grid_; }
    int K() const { return K_; }
    const std::vector<double>& times() const { return times_; }
    int levels() const { return static_cast<int>(times_.size()); }

    double& at(int level, int c, int node) { return data_[offset(level, c) + node]; }
    double at(int level, int c, int node) const { return data_[offset(level, c) + node]; }
    const double* sheet(int level, int c) const { return data_.data() + offset(level, c); }
    double* sheet(int level, int c) { return data_.data() + offset(level, c); }

    std::string scheme = "imex-euler";
    double dt = 0.0;
    std::vector<std::string> warnings;
    std::size_t escapes = 0;  ///< nonlocal shifts continued beyond the extrapolation band

    EscapePolicy queryPolicy = EscapePolicy::Throw;

    /// Level bracket for t: (k, weight of k+1).
    std::pair<int, double> bracket(double t) const {
        const double tol = 1e-12 * std::max(1.0, std::abs(times_.back()));
        if (t < times_.front() - tol || t > times_.back() + tol) {
            std::ostringstream os;
            os << "time " << t << " outside [" << times_.front() << ", " << times_.back() << "]";
            throw DomainEscape(os.str());
        }
        if (levels() == 1) return {0, 0.0};
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        int k = std::clamp(static_cast<int>(it - times_.begin()) - 1, 0, levels() - 2);
        if (std::abs(t - times_[k]) <= tol) return {k, 0.0};
        if (std::abs(t - times_[k + 1]) <= tol) return {k + 1, 0.0};
        return {k, (t - times_[k]) / (times_[k + 1] - times_[k])};
    }

    double level_value(int level, const Vec& y, int c, EscapePolicy policy) const {
        auto st = grid_.stencil(y, policy);
        const double* s = sheet(level, c);
        double v = 0.0;
        for (int q = 0; q < st.count; ++q) v += st.w[q] * s[st.idx[q]];
        return v;
    }

    double value(double t, const Vec& y, int c) const { return value(t, y, c, queryPolicy); }
    double value(double t, const Vec& y, int c, EscapePolicy policy) const {
        auto [k, w] = bracket(t);
        double v = level_value(k, y, c, policy);
        if (w != 0.0) v = (1 - w) * v + w * level_value(k + 1, y, c, policy);
        return v;
    }

    /// Nodal gradient from three-point stencils in physical coordinates.
    Vec node_gradient(int level, int c, int node) const {
        const double* s = sheet(level, c);
        auto mi = grid_.multi(node);
        Vec g(grid_.dims());
        for (int a = 0; a < grid_.dims(); ++a) {
            double acc = 0.0;
            for (auto [j, w] : grid_.d1(a, mi[a])) acc += w * s[a == 0 ? grid_.index(j, mi[1]) : grid_.index(mi[0], j)];
            g(a) = acc;
        }
        return g;
    }

    Mat node_hessian(int level, int c, int node) const {
        const double* s = sheet(level, c);
        auto mi = grid_.multi(node);
        const int q = grid_.dims();
        Mat h(q, q);
        for (int a = 0; a < q; ++a) {
            double acc = 0.0;
            for (auto [j, w] : grid_.d2(a, mi[a])) acc += w * s[a == 0 ? grid_.index(j, mi[1]) : grid_.index(mi[0], j)];
            h(a, a) = acc;
        }
        if (q == 2) {
            double acc = 0.0;
            for (auto [i0, w0] : grid_.d1(0, mi[0]))
                for (auto [i1, w1] : grid_.d1(1, mi[1])) acc += w0 * w1 * s[grid_.index(i0, i1)];
            h(0, 1) = h(1, 0) = acc;
        }
        return h;
    }

    Vec gradient(double t, const Vec& y, int c) const {
        auto [k, w] = bracket(t);
        auto at_level = [&](int lv) {
            auto st = grid_.stencil(y, queryPolicy);
            Vec g = Vec::Zero(grid_.dims());
            for (int q = 0; q < st.count; ++q) g += st.w[q] * node_gradient(lv, c, st.idx[q]);
            return g;
        };
        Vec g = at_level(k);
        if (w != 0.0) g = (1 - w) * g + w * at_level(k + 1);
        return g;
    }

    Mat hessian(double t, const Vec& y, int c) const {
        auto [k, w] = bracket(t);
        auto at_level = [&](int lv) {
            auto st = grid_.stencil(y, queryPolicy);
            Mat h = Mat::Zero(grid_.dims(), grid_.dims());
            for (int q = 0; q < st.count; ++q) h += st.w[q] * node_hessian(lv, c, st.idx[q]);
            return h;
        };
        Mat h = at_level(k);
        if (w != 0.0) h = (1 - w) * h + w * at_level(k + 1);
        return h;
    }

    bool allFinite() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    /// CSV: '#' header lines (scheme, dt, K, axes), then rows t,y...,c,v with c 1-based.
    std::string to_csv() const {
        std::ostringstream os;
        os << "# value field\n";
        os << "# scheme=" << scheme << " dt=" << fmt_num(dt) << " K=" << K_ << " levels=" << levels() << "\n";
        for (int a = 0; a < grid_.dims(); ++a) {
            const auto& ax = grid_.axis(a);
            os << "# axis=" << (a + 1) << " lo=" << fmt_num(ax.lo) << " hi=" << fmt_num(ax.hi) << " nodes=" << ax.nodes
               << " log=" << (ax.log ? 1 : 0) << "\n";
        }
        os << "t";
        for (int a = 0; a < grid_.dims(); ++a) os << ",y" << (a + 1);
        os << ",c,v\n";
        for (int lv = 0; lv < levels(); ++lv)
            for (int c = 0; c < K_; ++c)
                for (int i = 0; i < grid_.size(); ++i) {
                    Vec z = grid_.point(i);
                    os << fmt_num(times_[lv]);
                    for (int a = 0; a < grid_.dims(); ++a) os << "," << fmt_num(z(a));
                    os << "," << (c + 1) << "," << fmt_num(at(lv, c, i)) << "\n";
                }
        return os.str();
    }

    static ValueField from_csv(const std::string& text) {
        std::istringstream is(text);
        std::string line;
        std::string scheme = "imex-euler";
        double dt = 0.0;
        int K = 0, levels = 0;
        std::vector<Axis> axes;
        auto field = [](const std::string& l, const std::string& key) {
            auto p = l.find(key + "=");
            if (p == std::string::npos) throw ConfigError("value field header lacks '" + key + "'");
            auto e = l.find(' ', p);
            return l.substr(p + key.size() + 1, e == std::string::npos ? std::string::npos : e - p - key.size() - 1);
        };
        std::vector<std::vector<double>> rows;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            if (line[0] == '#') {
                if (line.find("scheme=") != std::string::npos) {
                    scheme = field(line, "scheme");
                    dt = std::stod(field(line, "dt"));
                    K = std::stoi(field(line, "K"));
                    levels = std::stoi(field(line, "levels"));
                } else if (line.find("axis=") != std::string::npos) {
                    axes.emplace_back(std::stod(field(line, "lo")), std::stod(field(line, "hi")),
                                      std::stoi(field(line, "nodes")), field(line, "log") == "1");
                }
                continue;
            }
            if (line[0] == 't') continue;
            std::vector<double> r;
            std::istringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ',')) r.push_back(std::stod(cell));
            rows.push_back(std::move(r));
        }
        if (axes.empty() || K < 1 || levels < 1) throw ConfigError("value field CSV header incomplete");
        SpatialGrid g(axes);
        const std::size_t per = static_cast<std::size_t>(K) * g.size();
        if (rows.size() != per * levels) throw ConfigError("value field CSV has wrong row count");
        std::vector<double> times;
        for (int lv = 0; lv < levels; ++lv) times.push_back(rows[lv * per][0]);
        ValueField f(g, K, times);
        f.scheme = scheme;
        f.dt = dt;
        std::size_t r = 0;
        for (int lv = 0; lv < levels; ++lv)
            for (int c = 0; c < K; ++c)
                for (int i = 0; i < g.size(); ++i) f.at(lv, c, i) = rows[r++].back();
        return f;
    }

private:
    std::size_t offset(int level, int c) const {
        return (static_cast<std::size_t>(level) * K_ + c) * grid_.size();
    }

    SpatialGrid grid_;
    int K_ = 1;
    std::vector<double> times_;
    std::vector<double> data_;
};

/// field_interpolate: linear in time and space, exact at nodes.
inline double field_interpolate(const ValueField& v, double t, const Vec& y, int c) { return v.value(t, y, c); }

}  // namespace rmhedge
