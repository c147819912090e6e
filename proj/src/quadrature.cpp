#include "fbsde/numerics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fbsde {

namespace {

// Orthonormal probabilists' Hermite polynomials:
//   p_0 = 1, p_1 = x, sqrt(k+1) p_{k+1} = x p_k - sqrt(k) p_{k-1}.
// Returns p_n(x) and p_n'(x); `sum_sq` receives sum_{k<n} p_k(x)^2.
struct HermiteEval {
    double value;
    double derivative;
    double sum_sq;
};

HermiteEval hermite(int n, double x) {
    double prev = 0.0, cur = 1.0;
    double dprev = 0.0, dcur = 0.0;
    double sum_sq = 0.0;
    for (int k = 0; k < n; ++k) {
        sum_sq += cur * cur;
        const double a = std::sqrt(static_cast<double>(k + 1));
        const double b = std::sqrt(static_cast<double>(k));
        const double next = (x * cur - b * prev) / a;
        const double dnext = (cur + x * dcur - b * dprev) / a;
        prev = cur;
        cur = next;
        dprev = dcur;
        dcur = dnext;
    }
    return {cur, dcur, sum_sq};
}

}  // namespace

QuadratureRule gauss_hermite(int n) {
    if (n < 1 || n > 64) throw ModelError("quadrature order must be in [1, 64]");

    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    if (n == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = 1.0;
        return rule;
    }

    // Jacobi matrix: zero diagonal, off-diagonal sqrt(k).
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& guess = solver.eigenvalues();

    for (int j = 0; j < n; ++j) {
        double x = guess(j);
        for (int it = 0; it < 20; ++it) {
            const HermiteEval e = hermite(n, x);
            const double dx = e.value / e.derivative;
            x -= dx;
            if (std::abs(dx) <= 1e-16 * std::max(1.0, std::abs(x))) break;
        }
        rule.nodes[j] = x;
    }
    // Symmetrize so odd moments vanish to rounding.
    for (int j = 0; j < n / 2; ++j) {
        const double a = 0.5 * (rule.nodes[n - 1 - j] - rule.nodes[j]);
        rule.nodes[j] = -a;
        rule.nodes[n - 1 - j] = a;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;

    for (int j = 0; j < n; ++j) {
        rule.weights[j] = 1.0 / hermite(n, rule.nodes[j]).sum_sq;
    }
    const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
    for (double& w : rule.weights) w /= total;
    for (int j = 0; j < n / 2; ++j) {
        const double w = 0.5 * (rule.weights[j] + rule.weights[n - 1 - j]);
        rule.weights[j] = rule.weights[n - 1 - j] = w;
    }
    return rule;
}

}  // namespace fbsde
