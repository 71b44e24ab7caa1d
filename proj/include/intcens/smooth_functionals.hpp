#pragma once

// Score equations at the mass points of a fitted distribution function and
// plug-in estimation of the mean.

#include "intcens/asymptotics.hpp"
#include "intcens/data.hpp"
#include "intcens/estimators.hpp"

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace intcens {

using Kappa = std::function<double(double)>;

/// Mass points of F with an extra point at +infinity carrying 1 - F(last)
/// when F stops short of 1. kappa is evaluated at `tail_at` for that point.
struct MassPoints {
  VectorXd points;
  VectorXd masses;
  bool has_tail = false;
  double tail_at = 0.0;
};

MassPoints mass_points(const StepDistribution& F, const Sample2& sample);

struct ScoreSystem {
  MassPoints mass;
  /// Row k, column j: coefficient of b_j = a_j p_j in the equation at W_k.
  Eigen::MatrixXd matrix;
  /// kappa(W_k) - sum_j kappa(W_j) p_j
  VectorXd rhs;
};

ScoreSystem build_score_system(const StepDistribution& F, const Sample2& sample, const Kappa& kappa);

struct ScoreSolution {
  VectorXd mass_points;
  VectorXd masses;
  VectorXd scores;  // a_j
  /// sup-norm residual of the full system at the solution
  double residual = 0.0;
  /// reciprocal condition estimate of the solved (constrained) system
  double rcond = 0.0;
  /// true when the 1e-12 Tikhonov shift was needed
  bool regularized = false;

  /// sum_j a_j p_j
  double centering() const;
  /// phi(x) = -sum_{W_j <= x} a_j p_j
  double phi(double x) const;
};

/// The system has rank m - 1 (every row combination weighted by p vanishes);
/// the row with the largest mass is replaced by sum_j a_j p_j = 0.
ScoreSolution solve_scores(const StepDistribution& F, const Sample2& sample, const Kappa& kappa);

/// theta(u, v, d0, d1) per observation, with 0/0 = 0.
VectorXd theta_values(const StepDistribution& F, const ScoreSolution& sol, const Sample2& sample);

/// Left side of the phi form of the score equation, evaluated observation by
/// observation at every mass point of the solution.
VectorXd phi_equation_lhs(const StepDistribution& F, const ScoreSolution& sol, const Sample2& sample);

/// int_0^M {1 - F(x)} dx
double estimate_mean(const StepDistribution& F, double M);

struct FunctionalConfig {
  std::string model = "triangle-[0,1]";
  Index n = 1000;
  int reps = 2000;
  std::uint64_t seed = 1;
  std::vector<Estimator> estimators{Estimator::Mle, Estimator::LsFull, Estimator::LsSimple};
  int threads = 0;
  IcmOptions icm;

  void validate() const;
};

struct FunctionalRow {
  Estimator estimator = Estimator::LsFull;
  Index n = 0;
  int reps = 0;  // replications used
  int excluded = 0;
  double n_var = 0.0;
  double mc_stderr = 0.0;
};

struct FunctionalStudy {
  std::vector<FunctionalRow> rows;
  /// Plug-in means per estimator (config order), one per used replication.
  std::vector<std::vector<double>> raw;

  void write_csv(std::ostream& out) const;
  /// estimator,value lines for external box plots.
  void write_raw(std::ostream& out) const;
};

/// n times the Monte Carlo variance of the plug-in mean for each estimator.
FunctionalStudy functional_variance_study(const FunctionalConfig& cfg);

}  // namespace intcens
