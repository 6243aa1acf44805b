#pragma once

#include "rmhedge/errors.hpp"
#include "rmhedge/levy.hpp"
#include "rmhedge/model.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rmhedge {

using json = nlohmann::json;

struct PresetInfo {
    std::string name;
    std::string summary;
};

inline const std::vector<PresetInfo>& preset_list() {
    static const std::vector<PresetInfo> list = {
        {"black_scholes", "one asset, one regime, geometric Brownian motion"},
        {"merton_jump", "one asset, one regime, Gaussian log-jumps (quadrature density)"},
        {"exp_levy_regime", "one asset, K regimes, exponential Levy with jumps at regime switches"},
        {"stochvol_exp_levy", "d assets, optional OU volatility factor, K regimes, exponential Levy"},
        {"semi_markov_exp_levy", "one asset plus a time-since-switch clock driving the switching intensities"},
    };
    return list;
}

namespace params {

inline const json& need(const json& p, const std::string& key) {
    if (!p.is_object() || !p.contains(key)) throw ConfigError("missing parameter '" + key + "'");
    return p.at(key);
}

inline double num(const json& p, const std::string& key) {
    const json& v = need(p, key);
    if (!v.is_number()) throw ConfigError("parameter '" + key + "' must be a number");
    return v.get<double>();
}

inline double num_or(const json& p, const std::string& key, double def) {
    return p.is_object() && p.contains(key) ? num(p, key) : def;
}

inline int int_or(const json& p, const std::string& key, int def) {
    if (!p.is_object() || !p.contains(key)) return def;
    const json& v = p.at(key);
    if (!v.is_number_integer()) throw ConfigError("parameter '" + key + "' must be an integer");
    return v.get<int>();
}

inline std::vector<double> list(const json& v, const std::string& key) {
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError("parameter '" + key + "' must be a number or an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError("parameter '" + key + "' must contain numbers only");
        out.push_back(e.get<double>());
    }
    return out;
}

/// Per-regime scalar: a number (broadcast) or an array of length K.
inline std::vector<double> per_regime(const json& p, const std::string& key, int K, std::optional<double> def = {}) {
    if (!p.is_object() || !p.contains(key)) {
        if (def) return std::vector<double>(K, *def);
        throw ConfigError("missing parameter '" + key + "'");
    }
    auto v = list(p.at(key), key);
    if (v.size() == 1) v.assign(K, v[0]);
    if (static_cast<int>(v.size()) != K)
        throw ConfigError("parameter '" + key + "' needs " + std::to_string(K) + " entries");
    return v;
}

/// KxK matrix of numbers (diagonal ignored); a single number is broadcast off-diagonal.
inline std::vector<std::vector<double>> pair_matrix(const json& p, const std::string& key, int K,
                                                    std::optional<double> def = {}) {
    std::vector<std::vector<double>> out(K, std::vector<double>(K, 0.0));
    if (!p.is_object() || !p.contains(key)) {
        if (!def) throw ConfigError("missing parameter '" + key + "'");
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < K; ++j) out[i][j] = i == j ? 0.0 : *def;
        return out;
    }
    const json& v = p.at(key);
    if (v.is_number()) {
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < K; ++j) out[i][j] = i == j ? 0.0 : v.get<double>();
        return out;
    }
    if (!v.is_array() || static_cast<int>(v.size()) != K)
        throw ConfigError("parameter '" + key + "' must be a " + std::to_string(K) + "x" + std::to_string(K) + " matrix");
    for (int i = 0; i < K; ++i) {
        auto row = list(v[i], key);
        if (static_cast<int>(row.size()) != K)
            throw ConfigError("parameter '" + key + "' row " + std::to_string(i + 1) + " has wrong length");
        for (int j = 0; j < K; ++j) out[i][j] = i == j ? 0.0 : row[j];
    }
    return out;
}

inline LevyMeasure levy(const json& p, int defaultDim) {
    if (!p.is_object() || !p.contains("levy")) return LevyMeasure::none(defaultDim);
    const json& l = p.at("levy");
    std::string type = l.value("type", "none");
    if (type == "none") return LevyMeasure::none(defaultDim);
    if (type == "gaussian") {
        return LevyMeasure::gaussian(num(l, "mean"), num(l, "sd"), num(l, "mass"), num_or(l, "cut", 10.0),
                                     int_or(l, "panels", 6), num_or(l, "epsilon", 1e-8));
    }
    if (type == "atoms") {
        const json& pts = need(l, "points");
        auto w = list(need(l, "weights"), "weights");
        if (!pts.is_array() || pts.size() != w.size()) throw ConfigError("atoms: points and weights differ in length");
        std::vector<LevyNode> atoms;
        for (std::size_t k = 0; k < w.size(); ++k) atoms.push_back({to_vec(list(pts[k], "points")), w[k]});
        return LevyMeasure::atoms(std::move(atoms));
    }
    throw ConfigError("unknown Levy measure type '" + type + "'");
}

}  // namespace params

/// int_{|x|>1} e^{a^T x} nu(dx) < infinity, tested by comparing the tail integral on
/// the node box against a doubled box. Atom measures always pass.
inline bool exponential_tail_finite(const LevyMeasure& m, const Vec& a, std::string* why = nullptr) {
    if (m.empty() || m.isFiniteAtoms()) return true;
    const auto& q = std::get<QuadratureDensity>(m.representation());
    if (q.lower.size() != 1) return true;  // only 1D densities are probed
    using Rule = boost::math::quadrature::gauss<double, 20>;
    auto seg = [&](double lo, double hi) {
        double s = 0.0;
        if (hi <= lo) return s;
        const int panels = 64;
        double h = (hi - lo) / panels;
        for (int k = 0; k < panels; ++k) {
            double c = lo + (k + 0.5) * h;
            s += Rule::integrate([&](double x) { return std::exp(a(0) * x) * q.density(vec({x})); }, c - 0.5 * h,
                                 c + 0.5 * h);
        }
        return s;
    };
    auto tail = [&](double lo, double hi) { return seg(lo, std::min(hi, -1.0)) + seg(std::max(lo, 1.0), hi); };
    double lo = q.lower(0), hi = q.upper(0), w = hi - lo;
    double i1 = tail(lo, hi);
    double i2 = tail(lo - w, hi + w);
    bool ok = std::isfinite(i2) && std::abs(i2 - i1) <= 1e-6 * std::max(1.0, std::abs(i1));
    if (!ok && why) *why = "exponential moment of the Levy density does not settle when the cutoff is doubled";
    return ok;
}

struct Preset {
    MarketModelSpec model;
    json params;
};

namespace presets {

inline MarketModelSpec black_scholes(double sigma, double r) {
    MarketModelSpec m;
    m.name = "black_scholes";
    m.regimes = RegimeSet(1);
    m.d = 1;
    m.p = 0;
    m.n = 1;
    m.rW = 1;
    m.shortRate = [r](double, const Vec&, int) { return r; };
    m.drift = [r](double, const Vec& z, int) { return vec({z(0) * r}); };
    m.diffusion = [sigma](double, const Vec& z, int) {
        Mat s(1, 1);
        s(0, 0) = z(0) * sigma;
        return s;
    };
    return m;
}

inline MarketModelSpec merton_jump(double sigma, double r, const LevyMeasure& nu) {
    MarketModelSpec m = black_scholes(sigma, r);
    m.name = "merton_jump";
    m.levy = nu;
    m.n = nu.dim();
    m.jump = [](double, const Vec& z, int, const Vec& x) { return vec({z(0) * std::expm1(x(0))}); };
    double kappa = integrate_levy(nu, [](const Vec& x) { return std::expm1(x(0)); });
    m.jumpCompensator = [kappa](double, const Vec& z, int) { return vec({z(0) * kappa}); };
    return m;
}

/// One asset, regime-dependent sigma(c) in R^n shared by W and the jump exponent.
inline MarketModelSpec exp_levy_regime(std::vector<Vec> sigma, std::vector<double> r,
                                       std::vector<std::vector<double>> rho,
                                       std::vector<std::vector<double>> lambda, const LevyMeasure& nu) {
    const int K = static_cast<int>(sigma.size());
    if (K < 1 || static_cast<int>(r.size()) != K) throw ConfigError("exp_levy_regime: sigma and r need K entries");
    const int n = static_cast<int>(sigma[0].size());
    for (const auto& s : sigma)
        if (s.size() != n) throw ConfigError("exp_levy_regime: sigma(c) must share one dimension");
    if (!nu.empty() && nu.dim() != n) throw ConfigError("exp_levy_regime: Levy dimension must equal dim sigma(c)");
    MarketModelSpec m;
    m.name = "exp_levy_regime";
    m.regimes = RegimeSet(K);
    m.d = 1;
    m.p = 0;
    m.n = n;
    m.rW = n;
    m.levy = nu.empty() ? LevyMeasure::none(n) : nu;
    m.shortRate = [r](double, const Vec&, int c) { return r[c]; };
    m.drift = [r](double, const Vec& z, int c) { return vec({z(0) * r[c]}); };
    m.diffusion = [sigma](double, const Vec& z, int c) {
        Mat s = (z(0) * sigma[c]).transpose();
        return s;
    };
    if (!nu.empty()) {
        m.jump = [sigma](double, const Vec& z, int c, const Vec& x) {
            return vec({z(0) * std::expm1(sigma[c].dot(x))});
        };
        std::vector<double> kappa(K);
        for (int c = 0; c < K; ++c)
            kappa[c] = integrate_levy(nu, [&](const Vec& x) { return std::expm1(sigma[c].dot(x)); });
        m.jumpCompensator = [kappa](double, const Vec& z, int c) { return vec({z(0) * kappa[c]}); };
    }
    double bound = 0.0;
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j)
            if (i != j) bound = std::max(bound, lambda[i][j]);
    m.intensityBound = bound;
    if (K > 1) {
        m.intensity = [lambda](int i, int j, double, const Vec&) { return lambda[i][j]; };
        m.regimeJump = [rho](int i, int j, double, const Vec& z) { return vec({z(0) * std::expm1(rho[i][j])}); };
    }
    return m;
}

struct StochVolParams {
    int d = 1;
    int p = 0;
    int K = 1;
    int n = 1;
    std::vector<std::vector<Vec>> Sigma;        ///< [c][k] in R^n
    std::vector<double> r;                      ///< per regime
    std::vector<std::vector<Vec>> P;            ///< [i][j] in R^d
    std::vector<std::vector<double>> lambda;    ///< [i][j]
    double kappa = 1.0, theta = 0.0;            ///< OU factor
    std::vector<Vec> sigmaR;                    ///< [c] in R^n
    double volLo = 1.0, volHi = 1.0;            ///< logistic scaling of Sigma by the factor
};

inline MarketModelSpec stochvol_exp_levy(const StochVolParams& sp, const LevyMeasure& nu) {
    if (sp.p != 0 && sp.p != 1) throw ConfigError("stochvol_exp_levy: p must be 0 or 1");
    if (static_cast<int>(sp.Sigma.size()) != sp.K || static_cast<int>(sp.r.size()) != sp.K)
        throw ConfigError("stochvol_exp_levy: Sigma and r need K entries");
    if (sp.d + sp.p > kMaxDim) throw ConfigError("stochvol_exp_levy: too many state dimensions");
    if (!nu.empty() && nu.dim() != sp.n) throw ConfigError("stochvol_exp_levy: Levy dimension must equal n");
    MarketModelSpec m;
    m.name = "stochvol_exp_levy";
    m.regimes = RegimeSet(sp.K);
    m.d = sp.d;
    m.p = sp.p;
    m.n = sp.n;
    m.rW = sp.n;
    m.levy = nu.empty() ? LevyMeasure::none(sp.n) : nu;
    auto P = std::make_shared<const StochVolParams>(sp);
    auto vol = [P](const Vec& z) {
        if (P->p == 0) return 1.0;
        return P->volLo + (P->volHi - P->volLo) / (1.0 + std::exp(-z(P->d)));
    };
    m.shortRate = [P](double, const Vec&, int c) { return P->r[c]; };
    m.drift = [P](double, const Vec& z, int c) {
        Vec mu(P->d + P->p);
        for (int k = 0; k < P->d; ++k) mu(k) = z(k) * P->r[c];
        if (P->p == 1) mu(P->d) = P->kappa * (P->theta - z(P->d));
        return mu;
    };
    m.diffusion = [P, vol](double, const Vec& z, int c) {
        Mat s(P->d + P->p, P->n);
        double v = vol(z);
        for (int k = 0; k < P->d; ++k) s.row(k) = z(k) * v * P->Sigma[c][k].transpose();
        if (P->p == 1) s.row(P->d) = P->sigmaR[c].transpose();
        return s;
    };
    if (!nu.empty()) {
        m.jump = [P, vol](double, const Vec& z, int c, const Vec& x) {
            Vec f = Vec::Zero(P->d + P->p);
            double v = vol(z);
            for (int k = 0; k < P->d; ++k) f(k) = z(k) * std::expm1(v * P->Sigma[c][k].dot(x));
            return f;
        };
        if (sp.p == 0) {
            std::vector<Vec> kap(sp.K);
            for (int c = 0; c < sp.K; ++c) {
                kap[c] = Vec::Zero(sp.d);
                for (int k = 0; k < sp.d; ++k)
                    kap[c](k) = integrate_levy(nu, [&](const Vec& x) { return std::expm1(sp.Sigma[c][k].dot(x)); });
            }
            m.jumpCompensator = [kap](double, const Vec& z, int c) {
                Vec out = z.array() * kap[c].array();
                return out;
            };
        }
    }
    double bound = 0.0;
    for (int i = 0; i < sp.K; ++i)
        for (int j = 0; j < sp.K; ++j)
            if (i != j) bound = std::max(bound, sp.lambda[i][j]);
    m.intensityBound = bound;
    if (sp.K > 1) {
        m.intensity = [P](int i, int j, double, const Vec&) { return P->lambda[i][j]; };
        m.regimeJump = [P](int i, int j, double, const Vec& z) {
            Vec rj = Vec::Zero(P->d + P->p);
            for (int k = 0; k < P->d; ++k) rj(k) = z(k) * std::expm1(P->P[i][j](k));
            return rj;
        };
    }
    return m;
}

/// lambda^{ij}(R) = a + (b - a)(1 - e^{-R/tau}), bounded by max(a, b).
inline MarketModelSpec semi_markov_exp_levy(std::vector<double> sigma, double r,
                                            std::vector<std::vector<double>> a,
                                            std::vector<std::vector<double>> b, double tau, const LevyMeasure& nu) {
    const int K = static_cast<int>(sigma.size());
    if (K < 2) throw ConfigError("semi_markov_exp_levy: needs K >= 2");
    if (!(tau > 0.0)) throw ConfigError("semi_markov_exp_levy: tau must be > 0");
    for (double s : sigma)
        if (s < 0.0) throw ConfigError("semi_markov_exp_levy: sigma(c) must be >= 0");
    if (!nu.empty() && nu.dim() != 1) throw ConfigError("semi_markov_exp_levy: Levy marks must be scalar");
    MarketModelSpec m;
    m.name = "semi_markov_exp_levy";
    m.regimes = RegimeSet(K);
    m.d = 1;
    m.p = 1;
    m.n = 1;
    m.rW = 1;
    m.levy = nu.empty() ? LevyMeasure::none(1) : nu;
    auto lam = [a, b, tau](int i, int j, double R) {
        double w = -std::expm1(-std::max(R, 0.0) / tau);
        return a[i][j] + (b[i][j] - a[i][j]) * w;
    };
    m.intensity = [lam](int i, int j, double, const Vec& z) { return lam(i, j, z(1)); };
    double bound = 0.0;
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j)
            if (i != j) bound = std::max({bound, a[i][j], b[i][j]});
    m.intensityBound = bound;
    m.shortRate = [r](double, const Vec&, int) { return r; };
    m.drift = [r, lam, K](double, const Vec& z, int c) {
        double tot = 0.0;
        for (int j = 0; j < K; ++j)
            if (j != c) tot += lam(c, j, z(1));
        return vec({z(0) * r, 1.0 - z(1) * tot});
    };
    m.diffusion = [sigma](double, const Vec& z, int c) {
        Mat s(2, 1);
        s(0, 0) = z(0) * sigma[c];
        s(1, 0) = 0.0;
        return s;
    };
    m.regimeJump = [](int, int, double, const Vec& z) { return vec({0.0, -z(1)}); };
    if (!nu.empty()) {
        m.jump = [sigma](double, const Vec& z, int c, const Vec& x) {
            return vec({z(0) * std::expm1(sigma[c] * x(0)), 0.0});
        };
        std::vector<double> kappa(K);
        for (int c = 0; c < K; ++c)
            kappa[c] = integrate_levy(nu, [&](const Vec& x) { return std::expm1(sigma[c] * x(0)); });
        m.jumpCompensator = [kappa](double, const Vec& z, int c) { return vec({z(0) * kappa[c], 0.0}); };
    }
    return m;
}

}  // namespace presets

/// Build a preset from a name and JSON parameters.
inline Preset preset_model(const std::string& name, const json& p) {
    using namespace params;
    if (!p.is_object() && !p.is_null()) throw ConfigError("preset parameters must be a table");
    const json P = p.is_null() ? json::object() : p;
    const int growthM = int_or(P, "m", 1);
    auto check_tail = [&](const LevyMeasure& nu, const std::vector<Vec>& exps) {
        for (const auto& e : exps) {
            std::string why;
            if (!exponential_tail_finite(nu, 2.0 * growthM * e, &why)) throw ConfigError(name + ": " + why);
        }
    };
    Preset out;
    out.params = P;
    if (name == "black_scholes") {
        out.model = presets::black_scholes(num_or(P, "sigma", 0.2), num_or(P, "r", 0.0));
    } else if (name == "merton_jump") {
        LevyMeasure nu = P.contains("levy")
                             ? levy(P, 1)
                             : LevyMeasure::gaussian(num(P, "jump_mean"), num(P, "jump_sd"), num(P, "jump_intensity"),
                                                     num_or(P, "cut", 10.0), int_or(P, "panels", 6));
        if (nu.dim() != 1) throw ConfigError("merton_jump: marks must be scalar");
        check_tail(nu, {vec({1.0})});
        out.model = presets::merton_jump(num_or(P, "sigma", 0.2), num_or(P, "r", 0.0), nu);
    } else if (name == "exp_levy_regime") {
        const json& sj = need(P, "sigma");
        if (!sj.is_array() || sj.empty()) throw ConfigError("exp_levy_regime: sigma must be an array with one entry per regime");
        std::vector<Vec> sigma;
        for (const auto& e : sj) sigma.push_back(to_vec(list(e, "sigma")));
        const int K = static_cast<int>(sigma.size());
        auto nu = levy(P, static_cast<int>(sigma[0].size()));
        check_tail(nu, sigma);
        out.model = presets::exp_levy_regime(sigma, per_regime(P, "r", K, 0.0), pair_matrix(P, "rho", K, 0.0),
                                             pair_matrix(P, "lambda", K, K > 1 ? std::optional<double>{} : 0.0), nu);
    } else if (name == "stochvol_exp_levy") {
        presets::StochVolParams sp;
        sp.d = int_or(P, "d", 1);
        sp.p = int_or(P, "p", 0);
        sp.K = int_or(P, "K", 1);
        sp.n = int_or(P, "n", 1);
        if (sp.d < 1 || sp.K < 1 || sp.n < 1) throw ConfigError("stochvol_exp_levy: d, K, n must be >= 1");
        const json& S = need(P, "Sigma");
        if (!S.is_array() || static_cast<int>(S.size()) != sp.K)
            throw ConfigError("stochvol_exp_levy: Sigma needs one d x n matrix per regime");
        for (const auto& perReg : S) {
            if (!perReg.is_array() || static_cast<int>(perReg.size()) != sp.d)
                throw ConfigError("stochvol_exp_levy: Sigma[c] needs d rows");
            std::vector<Vec> rows;
            for (const auto& row : perReg) {
                Vec v = to_vec(list(row, "Sigma"));
                if (v.size() != sp.n) throw ConfigError("stochvol_exp_levy: Sigma rows need n entries");
                rows.push_back(v);
            }
            sp.Sigma.push_back(rows);
        }
        sp.r = per_regime(P, "r", sp.K, 0.0);
        sp.lambda = pair_matrix(P, "lambda", sp.K, sp.K > 1 ? std::optional<double>{} : 0.0);
        sp.P.assign(sp.K, std::vector<Vec>(sp.K, Vec::Zero(sp.d)));
        if (P.contains("P")) {
            const json& PJ = P.at("P");
            if (!PJ.is_array() || static_cast<int>(PJ.size()) != sp.K)
                throw ConfigError("stochvol_exp_levy: P must be K x K of d-vectors");
            for (int i = 0; i < sp.K; ++i) {
                if (!PJ[i].is_array() || static_cast<int>(PJ[i].size()) != sp.K)
                    throw ConfigError("stochvol_exp_levy: P must be K x K of d-vectors");
                for (int j = 0; j < sp.K; ++j) {
                    auto v = list(PJ[i][j], "P");
                    if (v.size() == 1) v.assign(sp.d, v[0]);
                    if (static_cast<int>(v.size()) != sp.d) throw ConfigError("stochvol_exp_levy: P entries need d values");
                    sp.P[i][j] = i == j ? Vec::Zero(sp.d) : to_vec(v);
                }
            }
        }
        if (sp.p == 1) {
            sp.kappa = num_or(P, "kappa", 1.0);
            sp.theta = num_or(P, "theta", 0.0);
            sp.volLo = num_or(P, "vol_lo", 0.5);
            sp.volHi = num_or(P, "vol_hi", 1.5);
            const json& SR = need(P, "sigma_R");
            if (!SR.is_array() || static_cast<int>(SR.size()) != sp.K)
                throw ConfigError("stochvol_exp_levy: sigma_R needs one n-vector per regime");
            for (const auto& e : SR) {
                Vec v = to_vec(list(e, "sigma_R"));
                if (v.size() != sp.n) throw ConfigError("stochvol_exp_levy: sigma_R entries need n values");
                sp.sigmaR.push_back(v);
            }
        }
        auto nu = levy(P, sp.n);
        std::vector<Vec> exps;
        for (int c = 0; c < sp.K; ++c)
            for (int k = 0; k < sp.d; ++k)
                for (int l = 0; l < sp.d; ++l) exps.push_back(0.5 * std::max(1.0, sp.volHi) * (sp.Sigma[c][k] + sp.Sigma[c][l]));
        check_tail(nu, exps);
        out.model = presets::stochvol_exp_levy(sp, nu);
    } else if (name == "semi_markov_exp_levy") {
        auto sigma = list(need(P, "sigma"), "sigma");
        const int K = static_cast<int>(sigma.size());
        auto nu = levy(P, 1);
        std::vector<Vec> exps;
        for (double s : sigma) exps.push_back(vec({s}));
        check_tail(nu, exps);
        out.model = presets::semi_markov_exp_levy(sigma, num_or(P, "r", 0.0), pair_matrix(P, "lambda_a", K),
                                                  pair_matrix(P, "lambda_b", K), num_or(P, "tau", 1.0), nu);
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return out;
}

/// Payment streams: call, put, constant, linear, bump, zero; plus a rate g per regime
/// and a transition payment matrix.
inline DividendSpec dividend_family(const std::string& family, const json& p, const MarketModelSpec& m) {
    using namespace params;
    const json P = p.is_null() ? json::object() : p;
    const int K = m.K();
    DividendSpec div;
    div.name = family;
    div.maturity = num_or(P, "maturity", 1.0);
    if (!(div.maturity > 0.0)) throw ConfigError("dividend maturity must be > 0");
    div.growthOrder = int_or(P, "m", 1);
    if (div.growthOrder < 1) throw ConfigError("dividend growth order m must be >= 1");
    const int asset = int_or(P, "asset", 1) - 1;
    if (asset < 0 || asset >= m.d) throw ConfigError("dividend asset index out of range");
    auto scale = per_regime(P, "scale", K, 1.0);
    if (family == "call" || family == "put") {
        double strike = num(P, "strike");
        bool call = family == "call";
        div.terminal = [=](const Vec& z, int c) {
            double x = call ? z(asset) - strike : strike - z(asset);
            return scale[c] * std::max(x, 0.0);
        };
    } else if (family == "constant") {
        auto value = per_regime(P, "value", K, 1.0);
        div.terminal = [value](const Vec&, int c) { return value[c]; };
    } else if (family == "linear") {
        Vec b = to_vec(list(need(P, "slope"), "slope"));
        if (b.size() != m.d) throw ConfigError("linear dividend slope needs d entries");
        auto a = per_regime(P, "intercept", K, 0.0);
        int d = m.d;
        div.terminal = [b, a, d](const Vec& z, int c) { return b.dot(z.head(d)) + a[c]; };
    } else if (family == "bump") {
        double center = num(P, "center"), width = num(P, "width"), amp = num_or(P, "amplitude", 1.0);
        if (!(width > 0.0)) throw ConfigError("bump width must be > 0");
        div.terminal = [=](const Vec& z, int c) {
            double u = (z(asset) - center) / width;
            return scale[c] * amp * std::exp(-u * u);
        };
    } else if (family == "zero") {
    } else {
        throw ConfigError("unknown dividend family '" + family + "'");
    }
    if (P.contains("rate")) {
        auto g = per_regime(P, "rate", K);
        div.rate = [g](double, const Vec&, int c) { return g[c]; };
    }
    if (P.contains("transition")) {
        auto dl = pair_matrix(P, "transition", K);
        div.transition = [dl](int i, int j, double, const Vec&) { return dl[i][j]; };
    }
    return div;
}

}  // namespace rmhedge
