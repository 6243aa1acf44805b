#pragma once

// Independent reference computations. Nothing here calls into the library
// numerics; inputs are plain numbers and std::function.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

inline double bs_call(double s, double k, double tau, double sigma, double r) {
    if (tau <= 0.0) return std::max(s - k, 0.0);
    double sd = sigma * std::sqrt(tau);
    double d1 = (std::log(s / k) + (r + 0.5 * sigma * sigma) * tau) / sd;
    return s * norm_cdf(d1) - k * std::exp(-r * tau) * norm_cdf(d1 - sd);
}

inline double bs_delta(double s, double k, double tau, double sigma, double r) {
    double sd = sigma * std::sqrt(tau);
    double d1 = (std::log(s / k) + (r + 0.5 * sigma * sigma) * tau) / sd;
    return norm_cdf(d1);
}

/// Merton (1976) call as a Poisson mixture of Black-Scholes prices.
inline double merton_call(double s, double k, double tau, double sigma, double r, double lam, double m, double delta,
                          int terms = 80) {
    const double kappa = std::exp(m + 0.5 * delta * delta) - 1.0;
    const double lp = lam * (1.0 + kappa);
    double out = 0.0;
    double logw = -lp * tau;  // log of Poisson weight for n = 0
    for (int n = 0; n < terms; ++n) {
        if (n > 0) logw += std::log(lp * tau) - std::log(static_cast<double>(n));
        double sn = std::sqrt(sigma * sigma + n * delta * delta / tau);
        double rn = r - lam * kappa + n * std::log(1.0 + kappa) / tau;
        out += std::exp(logw) * bs_call(s, k, tau, sn, rn);
    }
    return out;
}

/// Composite trapezoid rule with n intervals.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, long n) {
    const double h = (b - a) / n;
    double s = 0.5 * (f(a) + f(b));
    for (long i = 1; i < n; ++i) s += f(a + i * h);
    return s * h;
}

/// Moore-Penrose inverse from a full SVD.
inline Eigen::MatrixXd pinv(const Eigen::MatrixXd& A, double rel = 1e-12) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    Eigen::MatrixXd Sinv = Eigen::MatrixXd::Zero(A.cols(), A.rows());
    const double cut = rel * (s.size() ? s(0) : 0.0);
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > cut) Sinv(i, i) = 1.0 / s(i);
    return svd.matrixV() * Sinv * svd.matrixU().transpose();
}

/// Classical RK4 for y' = f(t, y) on [t0, t1] with n steps.
inline Eigen::VectorXd rk4(const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& f, Eigen::VectorXd y,
                           double t0, double t1, int n) {
    const double h = (t1 - t0) / n;
    double t = t0;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd k1 = f(t, y);
        Eigen::VectorXd k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
        Eigen::VectorXd k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
        Eigen::VectorXd k4 = f(t + h, y + h * k3);
        y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        t += h;
    }
    return y;
}

/// Finite-state chain with generator rates lam[i][j]: returns, for each start
/// state c, the pair (E int_0^T 1_i(C) lambda^{ij} dt summed against weights w[i][j],
/// E sum over transitions of pay[i][j] discounted at rate r).
/// State vector: occupation probabilities p (forward Kolmogorov) plus the accumulated integral.
inline double chain_expected_payments(const std::vector<std::vector<double>>& lam,
                                      const std::vector<std::vector<double>>& pay, int start, double T, double r = 0.0,
                                      int steps = 4000) {
    const int K = static_cast<int>(lam.size());
    Eigen::VectorXd y = Eigen::VectorXd::Zero(K + 1);
    y(start) = 1.0;
    auto f = [&](double t, const Eigen::VectorXd& s) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(K + 1);
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < K; ++j) {
                if (i == j) continue;
                d(i) -= lam[i][j] * s(i);
                d(j) += lam[i][j] * s(i);
                d(K) += std::exp(-r * t) * pay[i][j] * lam[i][j] * s(i);
            }
        return d;
    };
    return rk4(f, y, 0.0, T, steps)(K);
}

/// Occupation probabilities at time T from start state.
inline Eigen::VectorXd chain_distribution(const std::vector<std::vector<double>>& lam, int start, double T,
                                          int steps = 4000) {
    const int K = static_cast<int>(lam.size());
    Eigen::VectorXd y = Eigen::VectorXd::Zero(K);
    y(start) = 1.0;
    auto f = [&](double, const Eigen::VectorXd& s) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(K);
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < K; ++j)
                if (i != j) {
                    d(i) -= lam[i][j] * s(i);
                    d(j) += lam[i][j] * s(i);
                }
        return d;
    };
    return rk4(f, y, 0.0, T, steps);
}

/// Backward system for w_c with w(T) = a and
///   w_c' + sum_j lam[c][j] (w_j - w_c + pay[c][j]) + g[c] = 0,
/// the regime part of a claim v = b.s + w_c(t) whose asset part is a martingale
/// (zero rate). tau = T - t; returns w per regime.
inline std::vector<double> regime_value(const std::vector<std::vector<double>>& lam,
                                        const std::vector<std::vector<double>>& pay,
                                        const std::vector<double>& g, double tau, std::vector<double> a = {},
                                        int steps = 4000) {
    const int K = static_cast<int>(lam.size());
    // time-to-go form: dw/dtau = sum_j lam (w_j - w_c + pay) + g
    auto f = [&](double, const Eigen::VectorXd& w) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(K);
        for (int c = 0; c < K; ++c) {
            d(c) = g[c];
            for (int j = 0; j < K; ++j)
                if (j != c) d(c) += lam[c][j] * (w(j) - w(c) + pay[c][j]);
        }
        return d;
    };
    Eigen::VectorXd w0 = Eigen::VectorXd::Zero(K);
    for (std::size_t c = 0; c < a.size(); ++c) w0(c) = a[c];
    Eigen::VectorXd w = rk4(f, w0, 0.0, tau, steps);
    return std::vector<double>(w.data(), w.data() + K);
}

}  // namespace oracle
