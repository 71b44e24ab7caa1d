#pragma once

// Data generators for the simulation models and Monte Carlo variance studies
// of F_n(t) on a grid of times.

#include "intcens/asymptotics.hpp"
#include "intcens/data.hpp"
#include "intcens/estimators.hpp"
#include "intcens/rng.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace intcens {

/// X = F0^{-1}(W) for uniform W, and (U, V) the sorted pair of two independent
/// Uniform[0, M] draws. All built-in models have h uniform on the triangle.
Sample2 simulate(const ModelSpec& m, Index n, Rng& rng);

enum class Example1 { TruncExp, Uniform };

/// x = -log(1 - w (1 - e^-2)): inverse of the exponential truncated to [0, 2].
double trunc_exp_quantile(double w);

Sample2 gen_example1(Index n, Example1 f0, Rng& rng);
/// X uniform on [0,1], (U, V) uniform on the upper triangle of the unit square.
Sample2 gen_triangle(Index n, Rng& rng);

/// sup_t |F(t) - F0(t)| over [0, M].
double sup_error(const StepDistribution& F, const ModelSpec& m);

struct VarianceEstimate {
  double variance = 0.0;
  /// Delta-method standard error from the fourth central moment.
  double stderr_ = 0.0;
};

/// Unbiased sample variance; needs at least two values.
VarianceEstimate sample_variance(std::span<const double> x);

/// Times 0.1, 0.2, ..., 1.9 scaled to the support [0, M].
std::vector<double> default_grid(const ModelSpec& m);

struct StudyConfig {
  std::string model = "trunc-exp-[0,2]";
  Index n = 1000;
  int reps = 1000;
  std::vector<double> grid;  // empty: default_grid
  std::vector<Estimator> estimators{Estimator::Mle, Estimator::LsFull, Estimator::LsSimple};
  std::uint64_t seed = 1;
  int threads = 0;
  IcmOptions icm;
  bool theory = false;
  ChernoffOptions chernoff;

  void validate() const;
};

struct StudyRow {
  double t = 0.0;
  Estimator estimator = Estimator::LsFull;
  Index n = 0;
  int reps = 0;  // replications used after exclusions
  double scaled_var = 0.0;
  double mc_stderr = 0.0;
  double theory = 0.0;  // NaN unless requested
};

struct StudyTable {
  std::vector<StudyRow> rows;
  /// Non-converged replications excluded, per estimator in config order.
  std::vector<std::pair<Estimator, int>> excluded;
  double var_z = 0.0;
  bool has_theory = false;

  /// Linear interpolation of scaled_var between grid times, constant outside.
  double interpolate(Estimator e, double t) const;
  void write_csv(std::ostream& out) const;
  /// Long format t,estimator,series,value with `per_interval` interpolated
  /// points between consecutive grid times.
  void write_plot_data(std::ostream& out, int per_interval = 10) const;
};

/// For each replication r, simulates from a stream seeded by (seed, r), fits
/// every requested estimator and records F_n at the grid times. Returns
/// n^(2/3) times the sample variance per (t, estimator).
StudyTable variance_grid_study(const StudyConfig& cfg);

}  // namespace intcens
