#include "intcens/smooth_functionals.hpp"

#include "intcens/parallel.hpp"
#include "intcens/rng.hpp"
#include "intcens/simulation.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace intcens {

namespace {

constexpr double kTailMassFloor = 1e-12;

// Number of mass points at or left of x; the tail point at +inf never counts.
Index count_at_or_below(const VectorXd& points, Index finite, double x) {
  return static_cast<Index>(std::upper_bound(points.data(), points.data() + finite, x) - points.data());
}

struct Positions {
  std::vector<Index> ru;
  std::vector<Index> rv;
  VectorXd cum;  // cum[r] = p_0 + ... + p_{r-1}
};

Positions positions(const MassPoints& mp, const Sample2& sample) {
  const Index m = mp.points.size();
  const Index finite = mp.has_tail ? m - 1 : m;
  Positions pos;
  pos.ru.resize(static_cast<std::size_t>(sample.size()));
  pos.rv.resize(pos.ru.size());
  for (Index i = 0; i < sample.size(); ++i) {
    pos.ru[static_cast<std::size_t>(i)] = count_at_or_below(mp.points, finite, sample[i].u);
    pos.rv[static_cast<std::size_t>(i)] = count_at_or_below(mp.points, finite, sample[i].v);
  }
  pos.cum = VectorXd::Zero(m + 1);
  for (Index j = 0; j < m; ++j) pos.cum[j + 1] = pos.cum[j] + mp.masses[j];
  return pos;
}

// Denominators F(U), F(V) - F(U), 1 - F(V) recomputed from the masses so that
// the system's row combination with weights p cancels to rounding.
struct Denominators {
  double fu, df, sv;
};

Denominators denominators(const Positions& pos, std::size_t i) {
  const Index m = pos.cum.size() - 1;
  const double fu = pos.cum[pos.ru[i]];
  const double fv = pos.cum[pos.rv[i]];
  return {fu, fv - fu, pos.cum[m] - fv};
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

MassPoints mass_points(const StepDistribution& F, const Sample2& sample) {
  const auto jumps = F.masses();
  MassPoints mp;
  const double total = jumps.masses.sum();
  mp.has_tail = 1.0 - total > kTailMassFloor;
  const Index m = jumps.points.size() + (mp.has_tail ? 1 : 0);
  if (m == 0) throw Error("score system: F has no mass points");
  mp.points.resize(m);
  mp.masses.resize(m);
  mp.points.head(jumps.points.size()) = jumps.points;
  mp.masses.head(jumps.points.size()) = jumps.masses;
  mp.tail_at = sample.upper();
  if (mp.has_tail) {
    mp.points[m - 1] = std::numeric_limits<double>::infinity();
    mp.masses[m - 1] = 1.0 - total;
  }
  return mp;
}

ScoreSystem build_score_system(const StepDistribution& F, const Sample2& sample, const Kappa& kappa) {
  ScoreSystem sys;
  sys.mass = mass_points(F, sample);
  const MassPoints& mp = sys.mass;
  const Index m = mp.points.size();
  const Positions pos = positions(mp, sample);

  // Each observation adds a constant over up to three rectangles of the
  // matrix; accumulate them in a 2D difference array.
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m + 1, m + 1);
  auto add = [&](Index r0, Index r1, Index c0, Index c1, double val) {
    if (r0 >= r1 || c0 >= c1) return;
    D(r0, c0) += val;
    D(r0, c1) -= val;
    D(r1, c0) -= val;
    D(r1, c1) += val;
  };
  const double inv_n = 1.0 / static_cast<double>(sample.size());
  for (Index i = 0; i < sample.size(); ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const Index ru = pos.ru[ii];
    const Index rv = pos.rv[ii];
    const Denominators d = denominators(pos, ii);
    // x <= U_i : rows and columns of mass points at or below U_i
    if (d.fu > 0.0) add(0, ru, 0, ru, inv_n / d.fu);
    // U_i < x <= V_i
    if (d.df > 0.0) add(ru, rv, ru, rv, inv_n / d.df);
    // V_i < x : rows beyond V_i, columns at or below V_i
    if (d.sv > 0.0) add(rv, m, 0, rv, -inv_n / d.sv);
  }
  for (Index r = 0; r <= m; ++r)
    for (Index c = 1; c <= m; ++c) D(r, c) += D(r, c - 1);
  for (Index r = 1; r <= m; ++r) D.row(r) += D.row(r - 1);
  sys.matrix = D.topLeftCorner(m, m);

  VectorXd k(m);
  for (Index j = 0; j < m; ++j) k[j] = kappa(std::isfinite(mp.points[j]) ? mp.points[j] : mp.tail_at);
  sys.rhs = k.array() - k.dot(mp.masses);
  return sys;
}

double ScoreSolution::centering() const { return scores.dot(masses); }

double ScoreSolution::phi(double x) const {
  double s = 0.0;
  for (Index j = 0; j < mass_points.size() && mass_points[j] <= x; ++j) s += scores[j] * masses[j];
  return -s;
}

ScoreSolution solve_scores(const StepDistribution& F, const Sample2& sample, const Kappa& kappa) {
  const ScoreSystem sys = build_score_system(F, sample, kappa);
  const Index m = sys.rhs.size();
  Index pivot_row = 0;
  sys.mass.masses.maxCoeff(&pivot_row);

  Eigen::MatrixXd A = sys.matrix;
  VectorXd rhs = sys.rhs;
  A.row(pivot_row).setOnes();
  rhs[pivot_row] = 0.0;

  ScoreSolution sol;
  sol.mass_points = sys.mass.points;
  sol.masses = sys.mass.masses;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  sol.rcond = lu.rcond();
  VectorXd b;
  if (sol.rcond > 1e-14 && std::isfinite(sol.rcond)) {
    b = lu.solve(rhs);
  }
  if (b.size() != m || !b.allFinite()) {
    sol.regularized = true;
    A.diagonal().array() += 1e-12;
    b = A.partialPivLu().solve(rhs);
  }
  sol.scores = b.cwiseQuotient(sol.masses);
  sol.residual = (sys.matrix * b - sys.rhs).lpNorm<Eigen::Infinity>();
  return sol;
}

VectorXd theta_values(const StepDistribution& F, const ScoreSolution& sol, const Sample2& sample) {
  MassPoints mp = mass_points(F, sample);
  if (mp.points.size() != sol.mass_points.size()) throw Error("theta: solution does not belong to F");
  const Positions pos = positions(mp, sample);
  VectorXd S(pos.cum.size());  // S[r] = sum_{j<r} a_j p_j = -phi
  S[0] = 0.0;
  for (Index j = 0; j < sol.scores.size(); ++j) S[j + 1] = S[j] + sol.scores[j] * sol.masses[j];

  VectorXd theta(sample.size());
  for (Index i = 0; i < sample.size(); ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const Observation2& o = sample[i];
    const Denominators d = denominators(pos, ii);
    const double su = S[pos.ru[ii]];
    const double sv = S[pos.rv[ii]];
    theta[i] = o.d0 * ratio(su, d.fu) + o.d1 * ratio(sv - su, d.df) - o.d2() * ratio(sv, d.sv);
  }
  return theta;
}

VectorXd phi_equation_lhs(const StepDistribution& F, const ScoreSolution& sol, const Sample2& sample) {
  const MassPoints mp = mass_points(F, sample);
  const double total = mp.masses.sum();
  auto Fhat = [&](double x) { return std::isfinite(x) ? F(x) : total; };
  const double n = static_cast<double>(sample.size());
  VectorXd lhs = VectorXd::Zero(sol.mass_points.size());
  for (Index k = 0; k < lhs.size(); ++k) {
    const double x = sol.mass_points[k];
    for (const auto& o : sample.observations()) {
      const double fu = Fhat(o.u);
      const double fv = Fhat(o.v);
      if (x <= o.u) lhs[k] -= ratio(sol.phi(o.u), n * fu);
      if (o.u < x && x <= o.v) lhs[k] -= ratio(sol.phi(o.v) - sol.phi(o.u), n * (fv - fu));
      if (o.v < x) lhs[k] += ratio(sol.phi(o.v), n * (total - fv));
    }
  }
  return lhs;
}

double estimate_mean(const StepDistribution& F, double M) {
  double area = 0.0;
  double left = 0.0;
  double level = 0.0;
  for (Index j = 0; j < F.size() && F.knots()[j] < M; ++j) {
    const double right = F.knots()[j];
    if (right > left) area += (1.0 - level) * (right - left);
    left = std::max(left, right);
    level = F.values()[j];
  }
  if (M > left) area += (1.0 - level) * (M - left);
  return area;
}

void FunctionalConfig::validate() const {
  model_preset(model);
  if (n < 1) throw Error("functional: n must be >= 1");
  if (reps < 100) throw Error("functional: reps must be >= 100");
  if (estimators.empty()) throw Error("functional: no estimators requested");
  icm.validate();
}

FunctionalStudy functional_variance_study(const FunctionalConfig& cfg) {
  cfg.validate();
  const ModelSpec model = model_preset(cfg.model);
  const std::size_t E = cfg.estimators.size();
  const auto R = static_cast<std::size_t>(cfg.reps);
  std::vector<double> values(R * E);
  parallel_for(R, cfg.threads, [&](std::size_t r) {
    Rng rng = make_rng(cfg.seed, r);
    const Sample2 sample = simulate(model, cfg.n, rng);
    for (std::size_t e = 0; e < E; ++e) {
      const FitResult res = fit(cfg.estimators[e], sample, cfg.icm);
      values[r * E + e] = res.converged ? estimate_mean(res.F, model.M) : std::numeric_limits<double>::quiet_NaN();
    }
  });

  FunctionalStudy study;
  for (std::size_t e = 0; e < E; ++e) {
    std::vector<double> x;
    for (std::size_t r = 0; r < R; ++r)
      if (!std::isnan(values[r * E + e])) x.push_back(values[r * E + e]);
    FunctionalRow row;
    row.estimator = cfg.estimators[e];
    row.n = cfg.n;
    row.reps = static_cast<int>(x.size());
    row.excluded = cfg.reps - row.reps;
    if (x.size() >= 2) {
      const VarianceEstimate v = sample_variance(x);
      row.n_var = static_cast<double>(cfg.n) * v.variance;
      row.mc_stderr = static_cast<double>(cfg.n) * v.stderr_;
    } else {
      row.n_var = row.mc_stderr = std::numeric_limits<double>::quiet_NaN();
    }
    study.rows.push_back(row);
    study.raw.push_back(std::move(x));
  }
  return study;
}

void FunctionalStudy::write_csv(std::ostream& out) const {
  out << "estimator,n,reps,n_var,mc_stderr\n";
  for (const auto& r : rows)
    out << to_string(r.estimator) << ',' << r.n << ',' << r.reps << ',' << format_double(r.n_var) << ','
        << format_double(r.mc_stderr) << '\n';
}

void FunctionalStudy::write_raw(std::ostream& out) const {
  out << "estimator,value\n";
  for (std::size_t e = 0; e < rows.size(); ++e)
    for (double v : raw[e]) out << to_string(rows[e].estimator) << ',' << format_double(v) << '\n';
}

}  // namespace intcens
