#pragma once

// Estimators of a distribution function from current status and case-2
// interval-censored data.

#include "intcens/characterization.hpp"
#include "intcens/data.hpp"

#include <string>
#include <vector>

namespace intcens {

struct IcmOptions {
  double tol = 1e-8;
  int max_iter = 500;
  bool line_search = true;
  /// Armijo sufficient-decrease constant.
  double armijo = 1e-4;

  void validate() const;
};

struct FitResult {
  StepDistribution F;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  int iterations = 0;
  bool converged = false;
  FenchelReport fenchel;
  double objective = 0.0;
};

/// Isotonic regression of the current-status indicators: F(T_i) is the left
/// slope of the convex minorant of (i, sum_{j<=i} delta_j). Tied times are
/// merged into one knot.
StepDistribution fit_current_status(std::vector<CurrentStatusObservation> sample);

/// One-step estimator for the two-term criterion
/// sum {F(U) - d0}^2 + {F(V) - d0 - d1}^2.
StepDistribution fit_ls_simple(const Sample2& sample);

/// Three-term least-squares estimator computed by the iterative convex
/// minorant algorithm with clipping to [0,1] and multiplier recomputation.
FitResult fit_ls_full(const Sample2& sample, const IcmOptions& opts = {});

struct BarrierOptions {
  double mu_start = 1.0;
  double mu_factor = 0.1;
  double mu_stop = 1e-16;
  int max_newton = 200;
};

/// Same minimizer as fit_ls_full, reached from the interior with a
/// logarithmic barrier on 0 <= y_1 <= ... <= y_K <= 1 and damped Newton steps.
StepDistribution fit_ls_full_barrier(const Sample2& sample, const BarrierOptions& opts = {});

/// Nonparametric maximum likelihood estimator by the iterative convex
/// minorant algorithm with Hessian-diagonal weights.
FitResult fit_mle_ic2(const Sample2& sample, const IcmOptions& opts = {});

/// sum {F(U)-d0}^2 + {F(V)-F(U)-d1}^2 + {1-F(V)-d2}^2
double criterion_ls_full(const StepDistribution& F, const Sample2& sample);
/// sum {F(U)-d0}^2 + {F(V)-d0-d1}^2
double criterion_ls_simple(const StepDistribution& F, const Sample2& sample);
/// sum d0 log F(U) + d1 log(F(V)-F(U)) + d2 log(1-F(V)), with 0 log 0 = 0.
double loglik_ic2(const StepDistribution& F, const Sample2& sample);

enum class Estimator { Mle, LsFull, LsSimple };

/// "mle", "ls-full"/"ls_full" or "ls-simple"/"ls_simple".
Estimator parse_estimator(const std::string& s);
std::string to_string(Estimator e);

/// Dispatches to the named estimator. The one-step estimator always reports
/// convergence and carries its own certificate.
FitResult fit(Estimator e, const Sample2& sample, const IcmOptions& opts = {});

/// Case-2 sample whose likelihood coincides with the current-status
/// likelihood at the inspection times: delta = 1 becomes (t, tmax + 1, 1, 0)
/// and delta = 0 becomes (0, t, 0, 0). Requires every t > 0.
Sample2 embed_current_status(const std::vector<CurrentStatusObservation>& sample);

}  // namespace intcens
