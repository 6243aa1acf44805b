#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace rmhedge {

/// Upper bound on state, Wiener and mark dimensions. Small fixed-capacity
/// Eigen types keep the per-step coefficient calls allocation-free.
inline constexpr int kMaxDim = 6;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

/// Build a Vec from a brace list, e.g. vec({1.0, 2.0}).
inline Vec vec(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index k = 0;
    for (double x : xs) v(k++) = x;
    return v;
}

inline Vec zeros(int n) { return Vec::Zero(n); }

inline Vec to_vec(const std::vector<double>& xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t k = 0; k < xs.size(); ++k) v(static_cast<Eigen::Index>(k)) = xs[k];
    return v;
}

inline std::vector<double> to_std(const Vec& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

/// Sample mean and standard error of the mean.
struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

/// Welford accumulator; merge order is fixed by the caller so results are
/// independent of scheduling.
class RunningStats {
public:
    void add(double x) {
        ++n_;
        double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    Estimate estimate() const {
        Estimate e;
        e.mean = mean_;
        e.n = n_;
        e.se = n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
        return e;
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace rmhedge
