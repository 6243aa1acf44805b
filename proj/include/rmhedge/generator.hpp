#pragma once

#include "rmhedge/levy.hpp"
#include "rmhedge/model.hpp"
#include "rmhedge/value_field.hpp"

#include <concepts>
#include <functional>

namespace rmhedge {

/// Anything that can be queried for v, grad v and the Hessian at (u, z, c).
template <class V>
concept ValueSource = requires(const V& v, double u, const Vec& z, int c) {
    { v.value(u, z, c) } -> std::convertible_to<double>;
    { v.gradient(u, z, c) } -> std::convertible_to<Vec>;
    { v.hessian(u, z, c) } -> std::convertible_to<Mat>;
};

/// Closed-form value function; missing derivatives fall back to central differences.
struct AnalyticValue {
    std::function<double(double, const Vec&, int)> f;
    std::function<Vec(double, const Vec&, int)> grad;
    std::function<Mat(double, const Vec&, int)> hess;
    double fdStep = 1e-4;

    double value(double u, const Vec& z, int c) const { return f(u, z, c); }

    Vec gradient(double u, const Vec& z, int c) const {
        if (grad) return grad(u, z, c);
        Vec g(z.size());
        for (int a = 0; a < z.size(); ++a) {
            double h = fdStep * std::max(1.0, std::abs(z(a)));
            Vec zp = z, zm = z;
            zp(a) += h;
            zm(a) -= h;
            g(a) = (f(u, zp, c) - f(u, zm, c)) / (2 * h);
        }
        return g;
    }

    Mat hessian(double u, const Vec& z, int c) const {
        if (hess) return hess(u, z, c);
        const int q = static_cast<int>(z.size());
        Mat H(q, q);
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b) {
                double ha = fdStep * std::max(1.0, std::abs(z(a)));
                double hb = fdStep * std::max(1.0, std::abs(z(b)));
                auto ev = [&](double sa, double sb) {
                    Vec w = z;
                    w(a) += sa * ha;
                    w(b) += sb * hb;
                    return f(u, w, c);
                };
                H(a, b) = (ev(1, 1) - ev(1, -1) - ev(-1, 1) + ev(-1, -1)) / (4 * ha * hb);
            }
        return H;
    }
};

static_assert(ValueSource<AnalyticValue>);
static_assert(ValueSource<ValueField>);

/// Generator applied to v at (u, z, c):
///   grad v . mu + 1/2 Tr(a Hess v) + int (v(z+F) - v - grad v . F) nu
///   + sum_{c'} (v(z+rho, c') - v - grad v . rho) lambda^{cc'}.
template <ValueSource V>
double apply_generator(const MarketModelSpec& m, const V& v, double u, const Vec& z, int c) {
    const double v0 = v.value(u, z, c);
    const Vec g = v.gradient(u, z, c);
    const Mat H = v.hessian(u, z, c);
    double out = g.dot(m.drift(u, z, c));
    if (m.rW > 0) out += 0.5 * (m.covariance(u, z, c).cwiseProduct(H)).sum();
    if (m.hasLevy()) {
        out += integrate_levy(m.levy, [&](const Vec& x) {
            Vec f = m.F(u, z, c, x);
            return v.value(u, z + f, c) - v0 - g.dot(f);
        });
    }
    for (int j = 0; j < m.K(); ++j) {
        if (j == c) continue;
        double l = m.lambda(c, j, u, z);
        if (l == 0.0) continue;
        Vec r = m.rho(c, j, u, z);
        out += (v.value(u, z + r, j) - v0 - g.dot(r)) * l;
    }
    return out;
}

}  // namespace rmhedge
