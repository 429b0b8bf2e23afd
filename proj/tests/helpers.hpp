#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "rbb/composition.hpp"
#include "rbb/random.hpp"

namespace testing {

inline Eigen::MatrixXd random_positive(Eigen::Index n, Eigen::Index g, rbb::Rng& rng, double spread = 3.0) {
    std::normal_distribution<double> normal(0.0, spread);
    Eigen::MatrixXd m(n, g);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < g; ++j) m(i, j) = std::exp(normal(rng));
    return m;
}

inline Eigen::VectorXd random_scalars(Eigen::Index n, rbb::Rng& rng, double lo = 1e-3, double hi = 1e3) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    Eigen::VectorXd c(n);
    for (Eigen::Index i = 0; i < n; ++i) c[i] = std::exp(u(rng));
    return c;
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

/// Absolute correlation, for comparisons up to sign and scale.
inline double abs_corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd x = a.array() - a.mean();
    const Eigen::VectorXd y = b.array() - b.mean();
    return std::abs(x.dot(y)) / (x.norm() * y.norm());
}

} // namespace testing
