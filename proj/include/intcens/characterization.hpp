#pragma once

// Optimality certificates: the W processes, the boundary multipliers and the
// Fenchel conditions that characterize the case-2 estimators.

#include "intcens/data.hpp"

#include <string>

namespace intcens {

/// A process that jumps only at the grid times of a sample.
struct GridProcess {
  VectorXd times;
  VectorXd increments;
  VectorXd values;  // running sum of the increments

  /// Right-continuous evaluation; zero left of the first grid time.
  double operator()(double t) const;
};

/// W_{n,F}: the normalized negative gradient of the three-term least-squares
/// criterion, cumulated along the grid.
///
/// A u-endpoint contributes (d0 - F(u)) - (d1 - (F(v) - F(u))); a v-endpoint
/// contributes (d1 - (F(v) - F(u))) + (d0 + d1 - F(v)). Each is divided by n.
GridProcess w_process(const StepDistribution& F, const Sample2& sample);

/// W^(2) for the two-term criterion: u adds d0 - F(u), v adds d0 + d1 - F(v).
GridProcess w2_process(const StepDistribution& F, const Sample2& sample);

/// Score process of the case-2 log-likelihood divided by n, with 0/0 = 0.
/// A term whose indicator is 1 and whose probability is 0 yields +-infinity.
GridProcess mle_process(const StepDistribution& F, const Sample2& sample);

struct LagrangeMultipliers {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

/// lambda1 = -(sum of increments at grid points where F = 0),
/// lambda2 = +(sum of increments at grid points where F = 1).
///
/// Increments are attributed per endpoint, so an observation with F(u) = 0
/// and F(v) = 1 sends its u-part to lambda1 and its v-part to lambda2.
/// Boundary membership uses exact comparison with 0 and 1.
LagrangeMultipliers lagrange_multipliers(const StepDistribution& F, const Sample2& sample);
LagrangeMultipliers lagrange_multipliers(const StepDistribution& F, const Sample2& sample,
                                         const GridProcess& process);

struct FenchelReport {
  /// min over t >= 0 of lambda1 + W(t) (zero multipliers for the two-term
  /// criterion).
  double min_slack = 0.0;
  /// |int F dW - lambda2|.
  double equality_residual = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double tol = 0.0;
  bool pass = false;

  std::string to_json() const;
};

/// Conditions (i) lambda1 + W(t) >= 0 for all t >= 0 and
/// (ii) int F dW = lambda2 for the three-term least-squares criterion.
FenchelReport verify_fenchel(const StepDistribution& F, const Sample2& sample, double tol);

/// W^(2) >= 0 and int F dW^(2) = 0 for the two-term criterion.
FenchelReport verify_fenchel_simple(const StepDistribution& F, const Sample2& sample, double tol);

/// The same pair of conditions built on the likelihood score process.
FenchelReport verify_fenchel_mle(const StepDistribution& F, const Sample2& sample, double tol);

}  // namespace intcens
