#include "intcens/simulation.hpp"

#include "intcens/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace intcens {

Sample2 simulate(const ModelSpec& m, Index n, Rng& rng) {
  if (n < 1) throw Error("sample size must be >= 1");
  std::vector<Observation2> obs;
  obs.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double x = m.quantile(uniform01(rng));
    double u = 0.0;
    double v = 0.0;
    do {
      u = m.M * uniform01(rng);
      v = m.M * uniform01(rng);
    } while (u == v);
    if (u > v) std::swap(u, v);
    const int d0 = x <= u;
    const int d1 = u < x && x <= v;
    obs.push_back({u, v, d0, d1});
  }
  return Sample2(std::move(obs), m.M);
}

double trunc_exp_quantile(double w) { return -std::log1p(-w * -std::expm1(-2.0)); }

Sample2 gen_example1(Index n, Example1 f0, Rng& rng) {
  static const ModelSpec exp_model = model_preset("trunc-exp-[0,2]");
  static const ModelSpec unif_model = model_preset("uniform-[0,2]");
  return simulate(f0 == Example1::TruncExp ? exp_model : unif_model, n, rng);
}

Sample2 gen_triangle(Index n, Rng& rng) {
  static const ModelSpec model = model_preset("triangle-[0,1]");
  return simulate(model, n, rng);
}

double sup_error(const StepDistribution& F, const ModelSpec& m) { return sup_distance(F, m.F0, m.M); }

VarianceEstimate sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw Error("variance needs at least two replications");
  const Eigen::Map<const VectorXd> v(x.data(), static_cast<Index>(x.size()));
  const double r = static_cast<double>(x.size());
  const VectorXd c = v.array() - v.mean();
  VarianceEstimate e;
  e.variance = c.squaredNorm() / (r - 1.0);
  const double m4 = c.array().square().square().sum() / r;
  e.stderr_ = std::sqrt(std::max(0.0, m4 - e.variance * e.variance * (r - 3.0) / (r - 1.0)) / r);
  return e;
}

std::vector<double> default_grid(const ModelSpec& m) {
  std::vector<double> g;
  for (int i = 1; i <= 19; ++i) g.push_back(m.M * i / 20.0);
  return g;
}

void StudyConfig::validate() const {
  const ModelSpec m = model_preset(model);
  if (n < 1) throw Error("study: n must be >= 1");
  if (reps < 2) throw Error("study: reps must be >= 2 to estimate a variance");
  if (estimators.empty()) throw Error("study: no estimators requested");
  for (double t : grid)
    if (!(t > 0.0 && t < m.M)) throw Error("study: grid times must lie in (0, M)");
  icm.validate();
}

StudyTable variance_grid_study(const StudyConfig& cfg) {
  cfg.validate();
  const ModelSpec model = model_preset(cfg.model);
  const std::vector<double> grid = cfg.grid.empty() ? default_grid(model) : cfg.grid;
  const std::size_t E = cfg.estimators.size();
  const std::size_t G = grid.size();
  const auto R = static_cast<std::size_t>(cfg.reps);

  // values[(r * E + e) * G + g]; NaN marks an excluded replication.
  std::vector<double> values(R * E * G);
  const Eigen::Map<const VectorXd> times(grid.data(), static_cast<Index>(G));
  parallel_for(R, cfg.threads, [&](std::size_t r) {
    Rng rng = make_rng(cfg.seed, r);
    const Sample2 sample = simulate(model, cfg.n, rng);
    for (std::size_t e = 0; e < E; ++e) {
      const FitResult res = fit(cfg.estimators[e], sample, cfg.icm);
      const VectorXd at = res.F(times);
      for (std::size_t g = 0; g < G; ++g)
        values[(r * E + e) * G + g] = res.converged ? at[static_cast<Index>(g)] : std::numeric_limits<double>::quiet_NaN();
    }
  });

  StudyTable table;
  std::vector<CurvePoint> full;
  std::vector<CurvePoint> simple;
  if (cfg.theory) {
    table.has_theory = true;
    table.var_z = chernoff_variance(cfg.chernoff).variance;
    full = theoretical_variance_curve(model, grid, Variant::Full, table.var_z);
    simple = theoretical_variance_curve(model, grid, Variant::Simple, table.var_z);
  }
  const double scale = std::pow(static_cast<double>(cfg.n), 2.0 / 3.0);
  for (std::size_t e = 0; e < E; ++e) {
    int excluded = 0;
    for (std::size_t r = 0; r < R; ++r) excluded += std::isnan(values[(r * E + e) * G]);
    table.excluded.emplace_back(cfg.estimators[e], excluded);
    for (std::size_t g = 0; g < G; ++g) {
      std::vector<double> x;
      x.reserve(R);
      for (std::size_t r = 0; r < R; ++r)
        if (const double y = values[(r * E + e) * G + g]; !std::isnan(y)) x.push_back(y);
      StudyRow row;
      row.t = grid[g];
      row.estimator = cfg.estimators[e];
      row.n = cfg.n;
      row.reps = static_cast<int>(x.size());
      row.theory = std::numeric_limits<double>::quiet_NaN();
      if (x.size() >= 2) {
        const VarianceEstimate v = sample_variance(x);
        row.scaled_var = scale * v.variance;
        row.mc_stderr = scale * v.stderr_;
      } else {
        row.scaled_var = row.mc_stderr = std::numeric_limits<double>::quiet_NaN();
      }
      if (cfg.theory) row.theory = (cfg.estimators[e] == Estimator::LsSimple ? simple : full)[g].var_limit;
      table.rows.push_back(row);
    }
  }
  return table;
}

double StudyTable::interpolate(Estimator e, double t) const {
  std::vector<const StudyRow*> pts;
  for (const auto& r : rows)
    if (r.estimator == e) pts.push_back(&r);
  if (pts.empty()) throw Error("study table has no rows for " + to_string(e));
  if (t <= pts.front()->t) return pts.front()->scaled_var;
  if (t >= pts.back()->t) return pts.back()->scaled_var;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (t <= pts[i]->t) {
      const double w = (t - pts[i - 1]->t) / (pts[i]->t - pts[i - 1]->t);
      return (1.0 - w) * pts[i - 1]->scaled_var + w * pts[i]->scaled_var;
    }
  }
  return pts.back()->scaled_var;
}

void StudyTable::write_csv(std::ostream& out) const {
  out << "t,estimator,n,reps,scaled_var,mc_stderr";
  if (has_theory) out << ",theory";
  out << '\n';
  for (const auto& r : rows) {
    out << format_double(r.t) << ',' << to_string(r.estimator) << ',' << r.n << ',' << r.reps << ','
        << format_double(r.scaled_var) << ',' << format_double(r.mc_stderr);
    if (has_theory) out << ',' << format_double(r.theory);
    out << '\n';
  }
}

void StudyTable::write_plot_data(std::ostream& out, int per_interval) const {
  if (per_interval < 1) throw Error("plot data needs at least one point per interval");
  out << "t,estimator,series,value\n";
  std::vector<Estimator> seen;
  for (const auto& r : rows)
    if (std::find(seen.begin(), seen.end(), r.estimator) == seen.end()) seen.push_back(r.estimator);
  for (Estimator e : seen) {
    std::vector<const StudyRow*> pts;
    for (const auto& r : rows)
      if (r.estimator == e) pts.push_back(&r);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const int steps = i + 1 < pts.size() ? per_interval : 1;
      for (int s = 0; s < steps; ++s) {
        const double t = i + 1 < pts.size() ? pts[i]->t + (pts[i + 1]->t - pts[i]->t) * s / per_interval : pts[i]->t;
        out << format_double(t) << ',' << to_string(e) << ",simulated," << format_double(interpolate(e, t)) << '\n';
        if (has_theory) {
          const double th = i + 1 < pts.size()
                                ? pts[i]->theory + (pts[i + 1]->theory - pts[i]->theory) * s / per_interval
                                : pts[i]->theory;
          out << format_double(t) << ',' << to_string(e) << ",theory," << format_double(th) << '\n';
        }
      }
    }
  }
}

}  // namespace intcens
