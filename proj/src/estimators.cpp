#include "intcens/estimators.hpp"

#include "intcens/isotonic.hpp"
#include "objective.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace intcens {

void IcmOptions::validate() const {
  if (!(tol > 0.0)) throw Error("icm: tol must be positive");
  if (max_iter < 1) throw Error("icm: max_iter must be >= 1");
  if (!(armijo > 0.0 && armijo < 1.0)) throw Error("icm: armijo constant must lie in (0,1)");
}

namespace {

constexpr double kInteriorEps = 1e-10;
constexpr double kWeightFloor = 1e-8;

// Run structure of an ICM proposal: maximal runs of identical values, with
// runs at the clipping bounds marked as fixed.
struct Partition {
  std::vector<Index> starts;  // run starts plus sentinel
  std::vector<int> kind;      // -1 lower bound, +1 upper bound, 0 free

  bool operator==(const Partition&) const = default;
};

Partition partition_of(const VectorXd& y, double lo, double hi) {
  Partition p;
  for (Index k = 0; k < y.size(); ++k) {
    if (k == 0 || y[k] != y[k - 1]) {
      p.starts.push_back(k);
      p.kind.push_back(y[k] <= lo ? -1 : (y[k] >= hi ? 1 : 0));
    }
  }
  p.starts.push_back(y.size());
  return p;
}

// Floating-point noise level of an objective value.
double roundoff(double f) { return 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f)); }

// Entries at the clipping bounds moved onto exact 0 and 1.
VectorXd snap(const VectorXd& y, double lo, double hi) {
  VectorXd out = y;
  for (Index k = 0; k < out.size(); ++k) {
    if (out[k] <= lo) out[k] = 0.0;
    if (out[k] >= hi) out[k] = 1.0;
  }
  return out;
}

// Newton's method on the common values of the free runs of a partition, with
// bound runs fixed at exactly 0 or 1. The result may violate monotonicity or
// the [0, 1] bounds; nullopt means the objective or the step was not finite.
template <typename Terms>
std::optional<VectorXd> newton_on_partition(const detail::GridObjective<Terms>& f, const Partition& part,
                                            const VectorXd& start) {
  const Index K = start.size();
  std::vector<Index> block_of(static_cast<std::size_t>(K), -1);
  std::vector<Index> free_runs;
  VectorXd y = start;
  for (std::size_t r = 0; r + 1 < part.starts.size(); ++r) {
    const Index b = part.starts[r];
    const Index e = part.starts[r + 1];
    if (part.kind[r] != 0) {
      y.segment(b, e - b).setConstant(part.kind[r] < 0 ? 0.0 : 1.0);
      continue;
    }
    const Index id = static_cast<Index>(free_runs.size());
    free_runs.push_back(static_cast<Index>(r));
    for (Index k = b; k < e; ++k) block_of[static_cast<std::size_t>(k)] = id;
  }
  const Index B = static_cast<Index>(free_runs.size());
  double fy = f.value(y);
  if (!std::isfinite(fy)) return std::nullopt;

  auto apply = [&](const VectorXd& c) {
    VectorXd out = y;
    for (Index j = 0; j < B; ++j) {
      const auto r = static_cast<std::size_t>(free_runs[static_cast<std::size_t>(j)]);
      out.segment(part.starts[r], part.starts[r + 1] - part.starts[r]).setConstant(c[j]);
    }
    return out;
  };

  if (B > 0) {
    VectorXd c(B);
    for (Index j = 0; j < B; ++j) c[j] = y[part.starts[static_cast<std::size_t>(free_runs[static_cast<std::size_t>(j)])]];
    VectorXd g;
    Eigen::MatrixXd H;
    for (int it = 0; it < 60; ++it) {
      f.block_system(y, block_of, B, g, H);
      const double ridge = 1e-12 * std::max(1.0, H.diagonal().maxCoeff());
      H.diagonal().array() += ridge;
      const VectorXd step = -H.ldlt().solve(g);
      if (!step.allFinite()) return std::nullopt;
      const double slope = g.dot(step);
      const double gnorm = g.lpNorm<Eigen::Infinity>();
      double alpha = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 50; ++ls) {
        const VectorXd trial = apply(c + alpha * step);
        const double ft = f.value(trial);
        bool accept = ft <= fy + 1e-4 * alpha * slope || (ft <= fy && alpha * step.lpNorm<Eigen::Infinity>() < 1e-14);
        // Close to the optimum the predicted decrease drops below the rounding
        // noise of f; there a step is accepted when it shrinks the gradient.
        if (!accept && std::isfinite(ft) && ft <= fy + roundoff(fy)) {
          VectorXd gt;
          Eigen::MatrixXd Ht;
          f.block_system(trial, block_of, B, gt, Ht);
          accept = gt.lpNorm<Eigen::Infinity>() < gnorm;
        }
        if (accept) {
          c += alpha * step;
          y = trial;
          fy = ft;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved || alpha * step.lpNorm<Eigen::Infinity>() <= 1e-15) break;
    }
  }

  return y;
}

// Active-set refinement of newton_on_partition: a free run that leaves [0, 1]
// is pinned to the bound it crossed, adjacent free runs that come out in the
// wrong order are merged, and the system is solved again. Returns a candidate
// only when it is a finite, feasible distribution vector.
template <typename Terms>
std::optional<VectorXd> solve_on_partition(const detail::GridObjective<Terms>& f, Partition part, VectorXd start) {
  const Index K = start.size();
  for (int attempt = 0; attempt < 64; ++attempt) {
    const auto y = newton_on_partition(f, part, start);
    if (!y) return std::nullopt;

    const std::size_t R = part.kind.size();
    bool changed = false;
    for (std::size_t r = 0; r < R; ++r) {
      if (part.kind[r] != 0) continue;
      const double v = (*y)[part.starts[r]];
      if (v < 0.0 || v > 1.0) {
        part.kind[r] = v < 0.0 ? -1 : 1;
        changed = true;
      }
    }
    if (!changed) {
      // merge the first adjacent pair of free runs that is out of order
      for (std::size_t r = 0; r + 1 < R; ++r) {
        if (part.kind[r] != 0 || part.kind[r + 1] != 0) continue;
        const Index a = part.starts[r];
        const Index b = part.starts[r + 1];
        const Index e = part.starts[r + 2];
        if ((*y)[a] <= (*y)[b]) continue;
        start.segment(a, e - a).setConstant(0.5 * ((*y)[a] + (*y)[b]));
        part.starts.erase(part.starts.begin() + static_cast<std::ptrdiff_t>(r) + 1);
        part.kind.erase(part.kind.begin() + static_cast<std::ptrdiff_t>(r) + 1);
        changed = true;
        break;
      }
    }
    if (changed) continue;

    for (Index k = 0; k < K; ++k) {
      if (!((*y)[k] >= 0.0 && (*y)[k] <= 1.0)) return std::nullopt;
      if (k > 0 && (*y)[k] < (*y)[k - 1]) return std::nullopt;
    }
    return y;
  }
  return std::nullopt;
}

template <typename Terms, typename Certify>
FitResult run_icm(const Sample2& sample, VectorXd y, const IcmOptions& opts, double lo, double hi,
                  Certify certify) {
  opts.validate();
  const detail::GridObjective<Terms> f(sample);
  double fy = f.value(y);
  if (!std::isfinite(fy)) throw Error("icm: infeasible starting point");

  FitResult res;
  VectorXd g;
  VectorXd d;
  std::optional<Partition> previous;
  auto finish = [&](const VectorXd& values, int iterations, bool converged, const FenchelReport& rep) {
    res.F = StepDistribution::on_grid(sample, values);
    res.iterations = iterations;
    res.converged = converged;
    res.fenchel = rep;
    res.lambda1 = rep.lambda1;
    res.lambda2 = rep.lambda2;
    res.objective = f.value(values);
    return res;
  };

  VectorXd out = y;
  FenchelReport rep;
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    f.gradient(y, g, d);
    d = d.cwiseMax(kWeightFloor);
    const VectorXd target = y - g.cwiseQuotient(d);
    VectorXd proposal = pava(target, d).cwiseMax(lo).cwiseMin(hi);
    // Runs the polish put exactly on 0 or 1 stay there when the proposal only
    // clips them to the interior bounds; moving them by lo would add an
    // ascent component that can stall the line search.
    for (Index k = 0; k < proposal.size(); ++k) {
      if (proposal[k] == lo && y[k] == 0.0) proposal[k] = 0.0;
      if (proposal[k] == hi && y[k] == 1.0) proposal[k] = 1.0;
    }

    // Armijo backtracking between the current iterate and the proposal.
    const VectorXd dir = proposal - y;
    const double slope = g.dot(dir);
    VectorXd next = proposal;
    double fnext = f.value(proposal);
    if (opts.line_search) {
      double alpha = 1.0;
      while (!(fnext <= fy + opts.armijo * alpha * slope)) {
        alpha *= 0.5;
        if (alpha < 1e-12) {
          next = y;
          fnext = fy;
          break;
        }
        next = y + alpha * dir;
        fnext = f.value(next);
      }
    }

    Partition part = partition_of(proposal, lo, hi);
    if (previous && *previous == part) {
      if (auto cand = solve_on_partition(f, part, proposal)) {
        const double fc = f.value(*cand);
        if (fc <= fnext + roundoff(fnext)) {
          next = std::move(*cand);
          fnext = fc;
        }
      }
    }
    previous = std::move(part);

    const double change = (next - y).lpNorm<Eigen::Infinity>();

    y = std::move(next);
    fy = fnext;

    VectorXd snapped = snap(y, lo, hi);
    if (!std::isfinite(f.value(snapped))) snapped = y;
    rep = certify(StepDistribution::on_grid(sample, snapped), sample, opts.tol);
    out = snapped;
    if (rep.pass && change <= opts.tol) return finish(out, iter, true, rep);
  }
  return finish(out, opts.max_iter, false, rep);
}

VectorXd grid_responses(const Sample2& sample, VectorXd& counts) {
  const Index K = sample.grid_size();
  VectorXd sums = VectorXd::Zero(K);
  counts = VectorXd::Zero(K);
  for (Index i = 0; i < sample.size(); ++i) {
    const Observation2& o = sample[i];
    sums[sample.u_index(i)] += o.d0;
    sums[sample.v_index(i)] += o.d0 + o.d1;
    counts[sample.u_index(i)] += 1.0;
    counts[sample.v_index(i)] += 1.0;
  }
  return sums;
}

}  // namespace

StepDistribution fit_current_status(std::vector<CurrentStatusObservation> sample) {
  if (sample.empty()) throw Error("empty sample");
  for (const auto& o : sample) {
    if (!(o.t >= 0.0) || !std::isfinite(o.t)) throw Error("current status times must be finite and >= 0");
    if (o.delta != 0 && o.delta != 1) throw Error("current status indicator must be 0 or 1");
  }
  std::sort(sample.begin(), sample.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  std::vector<double> times;
  std::vector<double> sums;
  std::vector<double> counts;
  for (const auto& o : sample) {
    if (times.empty() || o.t != times.back()) {
      times.push_back(o.t);
      sums.push_back(0.0);
      counts.push_back(0.0);
    }
    sums.back() += o.delta;
    counts.back() += 1.0;
  }
  const auto m = static_cast<Index>(times.size());
  const Eigen::Map<const VectorXd> s(sums.data(), m);
  const Eigen::Map<const VectorXd> c(counts.data(), m);
  const VectorXd slopes = gcm_left_slopes(CusumDiagram<double>::from_increments(c, s));
  return StepDistribution(Eigen::Map<const VectorXd>(times.data(), m), slopes.cwiseMax(0.0).cwiseMin(1.0));
}

StepDistribution fit_ls_simple(const Sample2& sample) {
  VectorXd counts;
  const VectorXd sums = grid_responses(sample, counts);
  const VectorXd slopes = gcm_left_slopes(CusumDiagram<double>::from_increments(counts, sums));
  return StepDistribution::on_grid(sample, slopes);
}

FitResult fit_ls_full(const Sample2& sample, const IcmOptions& opts) {
  return run_icm<detail::LeastSquaresTerms>(
      sample, fit_ls_simple(sample).values(), opts, 0.0, 1.0,
      [](const StepDistribution& F, const Sample2& s, double tol) { return verify_fenchel(F, s, tol); });
}

FitResult fit_mle_ic2(const Sample2& sample, const IcmOptions& opts) {
  // Strictly increasing interior start: half the one-step estimate plus half
  // an even ramp, so every likelihood term is finite.
  const Index K = sample.grid_size();
  const VectorXd simple = fit_ls_simple(sample).values();
  VectorXd start(K);
  for (Index k = 0; k < K; ++k)
    start[k] = 0.5 * simple[k] + 0.5 * static_cast<double>(k + 1) / static_cast<double>(K + 1);
  start = start.cwiseMax(kInteriorEps).cwiseMin(1.0 - kInteriorEps);
  return run_icm<detail::NegLogLikTerms>(
      sample, start, opts, kInteriorEps, 1.0 - kInteriorEps,
      [](const StepDistribution& F, const Sample2& s, double tol) { return verify_fenchel_mle(F, s, tol); });
}

double criterion_ls_full(const StepDistribution& F, const Sample2& sample) {
  double total = 0.0;
  for (const auto& o : sample.observations()) total += detail::LeastSquaresTerms::value(o, F(o.u), F(o.v));
  return total;
}

double criterion_ls_simple(const StepDistribution& F, const Sample2& sample) {
  double total = 0.0;
  for (const auto& o : sample.observations()) {
    const double r0 = F(o.u) - o.d0;
    const double r1 = F(o.v) - o.d0 - o.d1;
    total += r0 * r0 + r1 * r1;
  }
  return total;
}

double loglik_ic2(const StepDistribution& F, const Sample2& sample) {
  double total = 0.0;
  for (const auto& o : sample.observations()) total -= detail::NegLogLikTerms::value(o, F(o.u), F(o.v));
  return total;
}

Estimator parse_estimator(const std::string& s) {
  if (s == "mle") return Estimator::Mle;
  if (s == "ls-full" || s == "ls_full") return Estimator::LsFull;
  if (s == "ls-simple" || s == "ls_simple") return Estimator::LsSimple;
  throw Error("unknown estimator '" + s + "'");
}

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::Mle:
      return "mle";
    case Estimator::LsFull:
      return "ls_full";
    case Estimator::LsSimple:
      return "ls_simple";
  }
  return {};
}

FitResult fit(Estimator e, const Sample2& sample, const IcmOptions& opts) {
  switch (e) {
    case Estimator::Mle:
      return fit_mle_ic2(sample, opts);
    case Estimator::LsFull:
      return fit_ls_full(sample, opts);
    case Estimator::LsSimple:
      break;
  }
  FitResult r;
  r.F = fit_ls_simple(sample);
  r.fenchel = verify_fenchel_simple(r.F, sample, opts.tol);
  r.converged = true;
  r.iterations = 1;
  r.objective = criterion_ls_simple(r.F, sample);
  return r;
}

Sample2 embed_current_status(const std::vector<CurrentStatusObservation>& sample) {
  if (sample.empty()) throw Error("empty sample");
  double tmax = 0.0;
  for (const auto& o : sample) tmax = std::max(tmax, o.t);
  std::vector<Observation2> obs;
  obs.reserve(sample.size());
  for (const auto& o : sample) {
    if (!(o.t > 0.0)) throw Error("embedding needs inspection times > 0");
    if (o.delta == 1)
      obs.push_back({o.t, tmax + 1.0, 1, 0});
    else
      obs.push_back({0.0, o.t, 0, 0});
  }
  return Sample2(std::move(obs));
}

}  // namespace intcens
