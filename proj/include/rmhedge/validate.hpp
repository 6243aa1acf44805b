#pragma once

#include "rmhedge/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace rmhedge {

struct Probe {
    double u = 0.0;
    Vec z;
    int c = 0;
};

struct SamplePlan {
    std::vector<Probe> probes;

    /// Tensor product of per-axis linspaces, crossed with times and all regimes.
    static SamplePlan box(const MarketModelSpec& m, const Vec& lo, const Vec& hi, int perAxis,
                          std::vector<double> times = {0.0}) {
        SamplePlan plan;
        const int dim = m.dim();
        std::vector<int> idx(dim, 0);
        while (true) {
            Vec z(dim);
            for (int a = 0; a < dim; ++a) {
                double f = perAxis > 1 ? static_cast<double>(idx[a]) / (perAxis - 1) : 0.5;
                z(a) = lo(a) + f * (hi(a) - lo(a));
            }
            for (double u : times)
                for (int c = 0; c < m.K(); ++c) plan.probes.push_back({u, z, c});
            int a = 0;
            while (a < dim && ++idx[a] == perAxis) idx[a++] = 0;
            if (a == dim) break;
        }
        return plan;
    }
};

struct CheckResult {
    std::string name;
    bool passed = true;
    std::string detail;
    std::string witness;  ///< first failing probe, if any
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    double lgConstant = 0.0;      ///< max over probes of LHS/(1+|z|^2)
    double growthConstant = 0.0;  ///< dividend growth ratio, when a dividend was checked

    bool ok() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
    }
    const CheckResult* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

namespace detail {
inline std::string describe(const Probe& p) {
    std::ostringstream os;
    os << "u=" << p.u << " z=(" << p.z.transpose() << ") c=" << (p.c + 1);
    return os.str();
}
}  // namespace detail

/// Probe-based checks of the standing assumptions. Never throws for a failed
/// assumption; failures are returned in the report.
inline ValidationReport validate_model(const MarketModelSpec& m, const SamplePlan& plan,
                                       double driftTol = 1e-10) {
    ValidationReport rep;
    const int dim = m.dim();

    CheckResult shape{"dimensions", true, "", ""};
    if (m.d < 1 || m.p < 0 || m.rW < 0 || dim > kMaxDim || m.n != m.levy.dim()) {
        shape.passed = false;
        shape.detail = "need d>=1, p>=0, d+p<=" + std::to_string(kMaxDim) + ", n == Levy dimension";
    }
    if (!m.drift || !m.diffusion) {
        shape.passed = false;
        shape.detail = "drift and diffusion are required";
    }
    rep.checks.push_back(shape);
    if (!shape.passed) return rep;

    CheckResult drift{"martingale_drift", true, "mu_S = s * r at every probe", ""};
    CheckResult inten{"intensity_bounded", true, "0 <= lambda^{ij} <= declared bound", ""};
    CheckResult lg{"linear_growth", true, "", ""};
    CheckResult finite{"finite_coefficients", true, "coefficients finite with expected shapes", ""};
    CheckResult comp{"jump_compensator", true, "closed-form compensator matches node table", ""};

    auto fail = [](CheckResult& c, const Probe& p, const std::string& why) {
        if (c.passed) {
            c.passed = false;
            c.witness = detail::describe(p) + ": " + why;
        }
    };

    for (const auto& pr : m.levy.nodes()) {
        if (!(pr.w > 0.0) || !pr.x.allFinite()) {
            finite.passed = false;
            finite.witness = "Levy node with non-positive weight or non-finite mark";
        }
    }
    if (!std::isfinite(m.levy.levy_moment())) {
        finite.passed = false;
        finite.witness = "int |x|^2 ^ 1 nu(dx) not finite";
    }

    for (const auto& pr : plan.probes) {
        if (!m.regimes.contains(pr.c) || pr.z.size() != dim) {
            fail(finite, pr, "probe outside state space");
            continue;
        }
        Vec mu = m.drift(pr.u, pr.z, pr.c);
        Mat sg = m.diffusion(pr.u, pr.z, pr.c);
        double r = m.rate(pr.u, pr.z, pr.c);
        if (mu.size() != dim || sg.rows() != dim || sg.cols() != m.rW || !mu.allFinite() || !sg.allFinite() ||
            !std::isfinite(r)) {
            fail(finite, pr, "drift/diffusion/rate malformed or non-finite");
            continue;
        }
        for (int k = 0; k < m.d; ++k) {
            double target = pr.z(k) * r;
            double err = std::abs(mu(k) - target);
            if (err > driftTol * std::max(1.0, std::abs(target))) {
                std::ostringstream os;
                os << "asset " << (k + 1) << ": mu=" << mu(k) << " vs s*r=" << target;
                fail(drift, pr, os.str());
            }
        }
        double lhs = mu.squaredNorm() + sg.squaredNorm();
        if (m.hasLevy()) {
            double j2 = integrate_levy(m.levy, [&](const Vec& x) { return m.F(pr.u, pr.z, pr.c, x).squaredNorm(); });
            lhs += j2;
            if (m.jumpCompensator) {
                Vec a = m.jumpCompensator(pr.u, pr.z, pr.c);
                Vec b = integrate_levy(m.levy, [&](const Vec& x) { return m.F(pr.u, pr.z, pr.c, x); });
                if ((a - b).norm() > 1e-10 * std::max(1.0, b.norm())) fail(comp, pr, "compensator mismatch");
            }
        }
        for (int j = 0; j < m.K(); ++j) {
            if (j == pr.c) continue;
            double l = m.lambda(pr.c, j, pr.u, pr.z);
            if (!std::isfinite(l) || l < 0.0 || l > m.intensityBound * (1.0 + 1e-12)) {
                std::ostringstream os;
                os << "lambda^{" << (pr.c + 1) << "," << (j + 1) << "}=" << l << " bound=" << m.intensityBound;
                fail(inten, pr, os.str());
            }
            Vec rj = m.rho(pr.c, j, pr.u, pr.z);
            if (rj.size() != dim || !rj.allFinite()) {
                fail(finite, pr, "regime jump malformed");
                continue;
            }
            lhs += rj.squaredNorm();
        }
        double ratio = lhs / (1.0 + pr.z.squaredNorm());
        if (!std::isfinite(ratio)) fail(lg, pr, "growth ratio not finite");
        rep.lgConstant = std::max(rep.lgConstant, ratio);
    }
    {
        std::ostringstream os;
        os << "LG constant over probes " << rep.lgConstant;
        lg.detail = os.str();
    }
    rep.checks.push_back(finite);
    rep.checks.push_back(drift);
    rep.checks.push_back(inten);
    rep.checks.push_back(lg);
    if (m.jumpCompensator) rep.checks.push_back(comp);
    return rep;
}

/// Growth bound |h|^2 + |g|^2 + sum |delta|^2 <= K (1 + |z|^{2m}) spot-checked at probes.
inline void validate_dividend(const MarketModelSpec& m, const DividendSpec& div, const SamplePlan& plan,
                              ValidationReport& rep) {
    CheckResult gr{"dividend_growth", true, "", ""};
    if (!(div.maturity > 0.0)) {
        gr.passed = false;
        gr.witness = "maturity must be > 0";
    }
    for (const auto& pr : plan.probes) {
        double lhs = std::pow(div.h(pr.z, pr.c), 2) + std::pow(div.g(pr.u, pr.z, pr.c), 2);
        for (int j = 0; j < m.K(); ++j)
            if (j != pr.c) lhs += std::pow(div.delta(pr.c, j, pr.u, pr.z), 2);
        double ratio = lhs / (1.0 + std::pow(pr.z.norm(), 2 * div.growthOrder));
        if (!std::isfinite(ratio) && gr.passed) {
            gr.passed = false;
            gr.witness = detail::describe(pr) + ": payment not finite";
        }
        if (std::isfinite(ratio)) rep.growthConstant = std::max(rep.growthConstant, ratio);
    }
    // Tail probe: along each ray the ratio must level off. A ratio that keeps
    // growing between 10z and 100z means growth faster than the declared order.
    auto lhs_at = [&](double u, const Vec& z, int c) {
        double v = std::pow(div.h(z, c), 2) + std::pow(div.g(u, z, c), 2);
        for (int j = 0; j < m.K(); ++j)
            if (j != c) v += std::pow(div.delta(c, j, u, z), 2);
        return v / (1.0 + std::pow(z.norm(), 2 * div.growthOrder));
    };
    for (const auto& pr : plan.probes) {
        if (!gr.passed) break;
        if (pr.z.norm() == 0.0) continue;
        const double near = lhs_at(pr.u, 10.0 * pr.z, pr.c), far = lhs_at(pr.u, 100.0 * pr.z, pr.c);
        if (std::isfinite(far) && far > 10.0 * near && far > rep.growthConstant) {
            gr.passed = false;
            std::ostringstream w;
            w << detail::describe(pr) << ": ratio " << near << " at 10z, " << far << " at 100z (m=" << div.growthOrder
              << ")";
            gr.witness = w.str();
        }
    }
    std::ostringstream os;
    os << "growth constant over probes " << rep.growthConstant << " (m=" << div.growthOrder << ")";
    gr.detail = os.str();
    rep.checks.push_back(gr);
}

}  // namespace rmhedge
