#include "intcens/estimators.hpp"

#include "objective.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cmath>
#include <limits>
#include <vector>

namespace intcens {

namespace {

// Interior state: the K+1 positive gaps x_0 = y_0, x_j = y_j - y_{j-1},
// x_K = 1 - y_{K-1}. Keeping gaps (not y) as the primary variables keeps
// tiny gaps accurate once the barrier weight becomes small.
VectorXd values_from_gaps(const VectorXd& x) {
  const Index K = x.size() - 1;
  VectorXd y(K);
  double run = 0.0;
  for (Index k = 0; k < K; ++k) {
    run += x[k];
    y[k] = run;
  }
  return y;
}

double barrier(const VectorXd& x) {
  double s = 0.0;
  for (Index j = 0; j < x.size(); ++j) {
    if (!(x[j] > 0.0)) return std::numeric_limits<double>::infinity();
    s -= std::log(x[j]);
  }
  return s;
}

}  // namespace

StepDistribution fit_ls_full_barrier(const Sample2& sample, const BarrierOptions& opts) {
  if (!(opts.mu_start > 0.0) || !(opts.mu_factor > 0.0 && opts.mu_factor < 1.0) || !(opts.mu_stop > 0.0))
    throw Error("barrier: invalid schedule");
  const detail::GridObjective<detail::LeastSquaresTerms> f(sample);
  const Index K = sample.grid_size();

  VectorXd x = VectorXd::Constant(K + 1, 1.0 / static_cast<double>(K + 1));
  auto phi = [&](const VectorXd& gaps, double mu) {
    const double b = barrier(gaps);
    if (!std::isfinite(b)) return std::numeric_limits<double>::infinity();
    return f.value(values_from_gaps(gaps)) + mu * b;
  };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(4 * sample.size() + 3 * K));
  Eigen::SparseMatrix<double> H(K, K);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;

  for (double mu = opts.mu_start;; mu *= opts.mu_factor) {
    const bool last = mu <= opts.mu_stop;
    for (int it = 0; it < opts.max_newton; ++it) {
      const VectorXd y = values_from_gaps(x);
      VectorXd grad;
      VectorXd diag;
      f.gradient(y, grad, diag);

      trip.clear();
      f.hessian_entries(y, [&](Index r, Index c, double v) { trip.emplace_back(r, c, v); });
      for (Index k = 0; k < K; ++k) {
        const double a = 1.0 / x[k];
        const double b = 1.0 / x[k + 1];
        grad[k] += mu * (b - a);
        trip.emplace_back(k, k, mu * (a * a + b * b));
        if (k + 1 < K) {
          trip.emplace_back(k, k + 1, -mu * b * b);
          trip.emplace_back(k + 1, k, -mu * b * b);
        }
      }
      H.setFromTriplets(trip.begin(), trip.end());
      if (!analyzed) {
        ldlt.analyzePattern(H);
        analyzed = true;
      }
      ldlt.factorize(H);
      VectorXd dy;
      if (ldlt.info() == Eigen::Success) dy = -ldlt.solve(grad);
      if (dy.size() != K || !dy.allFinite()) dy = -grad.cwiseQuotient(H.diagonal());  // gradient fallback

      // Newton decrement of f/mu + barrier, which is self-concordant.
      const double decrement = -grad.dot(dy);
      const double lambda_sq = decrement / mu;
      if (!(decrement > 0.0) || lambda_sq <= 1e-12 || dy.lpNorm<Eigen::Infinity>() < 1e-17) break;

      VectorXd dx(K + 1);
      dx[0] = dy[0];
      for (Index j = 1; j < K; ++j) dx[j] = dy[j] - dy[j - 1];
      dx[K] = -dy[K - 1];

      double alpha = 1.0;
      for (Index j = 0; j <= K; ++j)
        if (dx[j] < 0.0) alpha = std::min(alpha, -0.99 * x[j] / dx[j]);

      bool moved = false;
      if (lambda_sq < 1.0 / 16.0) {
        // Quadratic convergence region: the full step needs no line search.
        const VectorXd trial = x + alpha * dx;
        if (barrier(trial) < std::numeric_limits<double>::infinity()) {
          x = trial;
          moved = true;
        }
      } else {
        const double f0 = phi(x, mu);
        for (int ls = 0; ls < 60; ++ls) {
          const VectorXd trial = x + alpha * dx;
          const double ft = phi(trial, mu);
          if (ft <= f0 - 1e-4 * alpha * decrement) {
            x = trial;
            moved = true;
            break;
          }
          alpha *= 0.5;
        }
      }
      if (!moved) break;
    }
    if (last) break;
  }
  return StepDistribution::on_grid(sample, values_from_gaps(x));
}

}  // namespace intcens
