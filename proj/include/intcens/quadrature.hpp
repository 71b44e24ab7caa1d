#pragma once

#include <Eigen/Core>

namespace intcens {

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Gauss-Legendre rule of the given order on [-1, 1] (Golub-Welsch).
QuadratureRule gauss_legendre(int order);

/// Composite Gauss-Legendre rule on [a, b] with `panels` equal panels.
QuadratureRule composite_gauss_legendre(double a, double b, int panels, int order);

/// Default one-dimensional rule: 16 panels of 16 nodes (256 nodes).
struct QuadratureSpec {
  int panels = 16;
  int order = 16;
};

template <typename Fn>
double integrate(Fn&& fn, double a, double b, const QuadratureSpec& spec = {}) {
  if (!(b > a)) return 0.0;
  const QuadratureRule rule = composite_gauss_legendre(a, b, spec.panels, spec.order);
  double s = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * fn(rule.nodes[i]);
  return s;
}

}  // namespace intcens
