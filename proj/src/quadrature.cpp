#include "intcens/quadrature.hpp"

#include "intcens/data.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace intcens {

QuadratureRule gauss_legendre(int order) {
  if (order < 1) throw Error("quadrature order must be >= 1");
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(order); it != cache.end()) return it->second;

  // Jacobi matrix of the Legendre recurrence; eigenvalues are the nodes and
  // the squared first eigenvector components (times 2) are the weights.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  QuadratureRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights = 2.0 * es.eigenvectors().row(0).transpose().array().square();
  // Symmetrize to remove eigen-solver asymmetry.
  for (int i = 0; i < order / 2; ++i) {
    const int j = order - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  cache.emplace(order, rule);
  return rule;
}

QuadratureRule composite_gauss_legendre(double a, double b, int panels, int order) {
  if (panels < 1) throw Error("quadrature needs at least one panel");
  const QuadratureRule base = gauss_legendre(order);
  QuadratureRule rule;
  rule.nodes.resize(static_cast<Eigen::Index>(panels) * order);
  rule.weights.resize(rule.nodes.size());
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int i = 0; i < order; ++i) {
      const Eigen::Index k = static_cast<Eigen::Index>(p) * order + i;
      rule.nodes[k] = lo + 0.5 * h * (base.nodes[i] + 1.0);
      rule.weights[k] = 0.5 * h * base.weights[i];
    }
  }
  return rule;
}

}  // namespace intcens
