#pragma once

#include "rmhedge/errors.hpp"
#include "rmhedge/levy.hpp"
#include "rmhedge/types.hpp"

#include <functional>
#include <string>

namespace rmhedge {

/// Regimes are 0-based internally; files and reports use 1..K.
struct RegimeSet {
    int count = 1;

    explicit RegimeSet(int k = 1) : count(k) {
        if (k < 1) throw ConfigError("regime count must be >= 1");
    }
    bool contains(int c) const { return c >= 0 && c < count; }
};

using ScalarFn = std::function<double(double u, const Vec& z, int c)>;
using VectorFn = std::function<Vec(double u, const Vec& z, int c)>;
using MatrixFn = std::function<Mat(double u, const Vec& z, int c)>;
using JumpFn = std::function<Vec(double u, const Vec& z, int c, const Vec& x)>;
using PairVectorFn = std::function<Vec(int i, int j, double u, const Vec& z)>;
using PairScalarFn = std::function<double(int i, int j, double u, const Vec& z)>;

/// Coefficients of the state equation
///   dY = mu du + sigma dW + int F dPi~ + sum_{i!=j} rho^{ij} 1_i(C-) dM^{ij},
/// with Y = (S, R), S the d traded assets and R the p factors, C the regime.
/// The first d coordinates are the traded asset prices.
struct MarketModelSpec {
    std::string name = "custom";
    RegimeSet regimes{1};
    int d = 1;   ///< traded assets
    int p = 0;   ///< factors
    int n = 1;   ///< Levy mark dimension
    int rW = 1;  ///< Wiener dimension

    ScalarFn shortRate;
    VectorFn drift;
    MatrixFn diffusion;
    JumpFn jump;              ///< may be empty when the Levy measure is zero
    PairVectorFn regimeJump;  ///< may be empty: no jumps at switches
    PairScalarFn intensity;   ///< may be empty: lambda == 0
    double intensityBound = 0.0;
    LevyMeasure levy = LevyMeasure::none(1);
    /// Optional closed form of int F nu(dx); must agree with the node table.
    VectorFn jumpCompensator;
    bool timeHomogeneous = true;

    int K() const { return regimes.count; }
    int dim() const { return d + p; }

    double rate(double u, const Vec& z, int c) const { return shortRate ? shortRate(u, z, c) : 0.0; }

    double lambda(int i, int j, double u, const Vec& z) const {
        if (i == j || !intensity) return 0.0;
        return intensity(i, j, u, z);
    }

    double totalIntensity(int i, double u, const Vec& z) const {
        double s = 0.0;
        for (int j = 0; j < K(); ++j) s += lambda(i, j, u, z);
        return s;
    }

    Vec rho(int i, int j, double u, const Vec& z) const {
        if (i == j || !regimeJump) return Vec::Zero(dim());
        return regimeJump(i, j, u, z);
    }

    Vec F(double u, const Vec& z, int c, const Vec& x) const {
        if (!jump) return Vec::Zero(dim());
        return jump(u, z, c, x);
    }

    bool hasLevy() const { return !levy.empty() && static_cast<bool>(jump); }
    bool hasSwitching() const { return K() > 1 && static_cast<bool>(intensity); }

    /// int F(u,z,c,x) nu(dx).
    Vec levyCompensator(double u, const Vec& z, int c) const {
        if (!hasLevy()) return Vec::Zero(dim());
        if (jumpCompensator) return jumpCompensator(u, z, c);
        return integrate_levy(levy, [&](const Vec& x) { return F(u, z, c, x); });
    }

    /// Drift with both compensators subtracted: mu - int F nu - sum_j rho^{cj} lambda^{cj}.
    Vec compensatedDrift(double u, const Vec& z, int c) const {
        Vec m = drift(u, z, c);
        if (hasLevy()) m -= levyCompensator(u, z, c);
        if (hasSwitching()) {
            for (int j = 0; j < K(); ++j) {
                if (j == c) continue;
                double l = lambda(c, j, u, z);
                if (l != 0.0) m -= l * rho(c, j, u, z);
            }
        }
        return m;
    }

    /// a = sigma sigma^T.
    Mat covariance(double u, const Vec& z, int c) const {
        Mat s = diffusion(u, z, c);
        return s * s.transpose();
    }
};

using TerminalFn = std::function<double(const Vec& z, int c)>;

/// Payment stream: h at maturity, rate g, and delta^{ij} paid at i->j switches.
struct DividendSpec {
    std::string name = "custom";
    double maturity = 1.0;
    TerminalFn terminal;
    ScalarFn rate;
    PairScalarFn transition;
    int growthOrder = 1;
    bool timeHomogeneous = true;

    double h(const Vec& z, int c) const { return terminal ? terminal(z, c) : 0.0; }
    double g(double u, const Vec& z, int c) const { return rate ? rate(u, z, c) : 0.0; }
    double delta(int i, int j, double u, const Vec& z) const {
        if (i == j || !transition) return 0.0;
        return transition(i, j, u, z);
    }
    bool hasRate() const { return static_cast<bool>(rate); }
    bool hasTransition() const { return static_cast<bool>(transition); }
};

/// D = xi 1_{t>=T} + int g dt + int (delta^D)^T dW + int J^D dPi~ + sum int gamma^{D,ij} dM^{ij}.
/// `hat` carries (xi, g); its transition payments must be empty.
struct SemimartingaleDividendSpec {
    DividendSpec hat;
    VectorFn brownianLoading;  ///< rW-vector
    std::function<double(double u, const Vec& z, int c, const Vec& x)> jumpLoading;
    PairScalarFn transitionLoading;

    Vec deltaD(double u, const Vec& z, int c, int rW) const {
        return brownianLoading ? brownianLoading(u, z, c) : Vec::Zero(rW);
    }
    double JD(double u, const Vec& z, int c, const Vec& x) const {
        return jumpLoading ? jumpLoading(u, z, c, x) : 0.0;
    }
    double gammaD(int i, int j, double u, const Vec& z) const {
        if (i == j || !transitionLoading) return 0.0;
        return transitionLoading(i, j, u, z);
    }
};

}  // namespace rmhedge
