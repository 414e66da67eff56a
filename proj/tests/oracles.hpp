#pragma once

// Reference computations for the test suites. Nothing here calls into the
// library: kernels are closed-form lambdas, quadrature weights are written out
// by hand, and solvers are plain iterations.

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using Scalar1D = std::function<double(double, double)>;

inline double gaussian(double x, double y, double gamma = 1.0) { return std::exp(-gamma * (x - y) * (x - y)); }
inline double brownian(double x, double y) { return std::min(x, y); }
inline double neg_distance(double x, double y) { return -std::abs(x - y); }

/// Composite trapezoid rule on [a, b] with n nodes.
inline void trapezoid(double a, double b, int n, std::vector<double> &nodes, std::vector<double> &weights) {
    nodes.clear();
    weights.clear();
    const double h = (b - a) / (n - 1);
    for (int i = 0; i < n; ++i) {
        nodes.push_back(a + h * i);
        weights.push_back((i == 0 || i == n - 1) ? h / 2 : h);
    }
}

/// sum_a sum_b w_a w_b f(x_a) k(x_a, x_b) f(x_b), plain double loop.
inline double double_sum(const Scalar1D &k, const std::function<double(double)> &f, const std::vector<double> &nodes,
                         const std::vector<double> &weights) {
    double total = 0.0;
    for (std::size_t a = 0; a < nodes.size(); ++a) {
        for (std::size_t b = 0; b < nodes.size(); ++b) {
            total += weights[a] * weights[b] * f(nodes[a]) * k(nodes[a], nodes[b]) * f(nodes[b]);
        }
    }
    return total;
}

/// 1 / ((k - 1/2)^2 pi^2), the eigenvalues of min(x, y) on [0, 1].
inline double brownian_eigenvalue(int k) {
    const double t = (k - 0.5) * std::numbers::pi;
    return 1.0 / (t * t);
}

/// Leading five eigenvalues of min(x, y) on [0, 1] from a dense nonsymmetric
/// eigensolve of G W at trapezoid resolution 1025 (computed offline).
inline constexpr std::array<double, 5> kBrownianDenseEigenvalues = {
    4.052848140422202e-01, 4.503171664731624e-02, 1.621146885586755e-02, 8.271196505345454e-03,
    5.003594715214011e-03};

/// Riesz s = 1 energy of the unit-circle configuration {0, a, pi, pi + a}.
inline double four_point_energy(double a) {
    const std::array<double, 4> angles = {0.0, a, std::numbers::pi, std::numbers::pi + a};
    double total = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            if (i != j) {
                const double chord = 2.0 * std::abs(std::sin(0.5 * (angles[i] - angles[j])));
                total += 1.0 / chord;
            }
        }
    }
    return total / 16.0;
}

/// Grid search of four_point_energy over a in (0, pi); returns {argmin, min}.
inline std::pair<double, double> four_point_grid_search(int steps = 200000) {
    double best_a = 0.0;
    double best = INFINITY;
    for (int i = 1; i < steps; ++i) {
        const double a = std::numbers::pi * i / steps;
        const double e = four_point_energy(a);
        if (e < best) {
            best = e;
            best_a = a;
        }
    }
    return {best_a, best};
}

/// Energy of N equally spaced points on the unit circle, s = 1.
inline double equally_spaced_energy(int n) {
    double total = 0.0;
    for (int k = 1; k < n; ++k) {
        total += 1.0 / (2.0 * std::sin(std::numbers::pi * k / n));
    }
    return total * n / (static_cast<double>(n) * n);
}

/// Gradient descent on |Y - K U|_F^2 + lambda |K|_F^2, restricted to the lower
/// triangle when causal. Step 1 / L with L the Lipschitz constant of the gradient.
inline Eigen::MatrixXd ridge_gradient_descent(const Eigen::MatrixXd &u, const Eigen::MatrixXd &y, double lambda,
                                              bool causal, int iterations) {
    const Eigen::Index m = u.rows();
    const Eigen::MatrixXd uu = u * u.transpose();
    // Power iteration for the largest eigenvalue of U U^T.
    Eigen::VectorXd v = Eigen::VectorXd::Ones(m);
    double top = 0.0;
    for (int i = 0; i < 500; ++i) {
        const Eigen::VectorXd w = uu * v;
        top = w.norm() / v.norm();
        v = w / w.norm();
    }
    const double step = 1.0 / (2.0 * (top * 1.01 + lambda));
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, m);
    for (int it = 0; it < iterations; ++it) {
        Eigen::MatrixXd g = 2.0 * ((k * u - y) * u.transpose() + lambda * k);
        if (causal) {
            for (Eigen::Index i = 0; i < m; ++i) {
                for (Eigen::Index j = i + 1; j < m; ++j) g(i, j) = 0.0;
            }
        }
        k -= step * g;
    }
    return k;
}

/// Uniform points in [lo, hi).
inline std::vector<double> uniform_points(std::mt19937_64 &rng, int n, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(u(rng));
    return out;
}

}  // namespace oracle
