#include "intcens/characterization.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace intcens {

namespace {

// Accumulates per-endpoint contributions onto the grid and normalizes by n.
template <typename UPart, typename VPart>
GridProcess assemble(const StepDistribution& F, const Sample2& sample, UPart u_part, VPart v_part) {
  GridProcess p;
  p.times = sample.times();
  p.increments = VectorXd::Zero(sample.grid_size());
  for (Index i = 0; i < sample.size(); ++i) {
    const Observation2& o = sample[i];
    const double fu = F(o.u);
    const double fv = F(o.v);
    p.increments[sample.u_index(i)] += u_part(o, fu, fv);
    p.increments[sample.v_index(i)] += v_part(o, fu, fv);
  }
  p.increments /= static_cast<double>(sample.size());
  p.values.resize(p.increments.size());
  double run = 0.0;
  for (Index k = 0; k < p.increments.size(); ++k) {
    run += p.increments[k];
    p.values[k] = run;
  }
  return p;
}

// d / p with the 0/0 = 0 convention.
double ratio(int d, double p) {
  if (d == 0) return 0.0;
  return p > 0.0 ? 1.0 / p : std::numeric_limits<double>::infinity();
}

FenchelReport certify(const StepDistribution& F, const GridProcess& w, const LagrangeMultipliers& lm,
                      double tol) {
  FenchelReport r;
  r.lambda1 = lm.lambda1;
  r.lambda2 = lm.lambda2;
  r.tol = tol;
  double slack = std::numeric_limits<double>::infinity();
  if (w.times.size() == 0 || w.times[0] > 0.0) slack = lm.lambda1;  // W = 0 left of the grid
  double integral = 0.0;
  for (Index k = 0; k < w.times.size(); ++k) {
    slack = std::min(slack, lm.lambda1 + w.values[k]);
    const double fk = F(w.times[k]);
    if (fk != 0.0) integral += fk * w.increments[k];
  }
  r.min_slack = slack;
  r.equality_residual = std::abs(integral - lm.lambda2);
  r.pass = r.min_slack >= -tol && r.equality_residual <= tol;
  return r;
}

}  // namespace

double GridProcess::operator()(double t) const {
  const double* b = times.data();
  const double* it = std::upper_bound(b, b + times.size(), t);
  return it == b ? 0.0 : values[it - b - 1];
}

GridProcess w_process(const StepDistribution& F, const Sample2& sample) {
  return assemble(
      F, sample,
      [](const Observation2& o, double fu, double fv) { return (o.d0 - fu) - (o.d1 - (fv - fu)); },
      [](const Observation2& o, double fu, double fv) { return (o.d1 - (fv - fu)) + (o.d0 + o.d1 - fv); });
}

GridProcess w2_process(const StepDistribution& F, const Sample2& sample) {
  return assemble(
      F, sample, [](const Observation2& o, double fu, double) { return o.d0 - fu; },
      [](const Observation2& o, double, double fv) { return o.d0 + o.d1 - fv; });
}

GridProcess mle_process(const StepDistribution& F, const Sample2& sample) {
  return assemble(
      F, sample,
      [](const Observation2& o, double fu, double fv) { return ratio(o.d0, fu) - ratio(o.d1, fv - fu); },
      [](const Observation2& o, double fu, double fv) { return ratio(o.d1, fv - fu) - ratio(o.d2(), 1.0 - fv); });
}

LagrangeMultipliers lagrange_multipliers(const StepDistribution& F, const Sample2& sample,
                                         const GridProcess& process) {
  LagrangeMultipliers lm;
  const VectorXd& t = sample.times();
  for (Index k = 0; k < t.size(); ++k) {
    const double fk = F(t[k]);
    if (fk == 0.0) lm.lambda1 -= process.increments[k];
    if (fk == 1.0) lm.lambda2 += process.increments[k];
  }
  return lm;
}

LagrangeMultipliers lagrange_multipliers(const StepDistribution& F, const Sample2& sample) {
  return lagrange_multipliers(F, sample, w_process(F, sample));
}

FenchelReport verify_fenchel(const StepDistribution& F, const Sample2& sample, double tol) {
  const GridProcess w = w_process(F, sample);
  return certify(F, w, lagrange_multipliers(F, sample, w), tol);
}

FenchelReport verify_fenchel_simple(const StepDistribution& F, const Sample2& sample, double tol) {
  return certify(F, w2_process(F, sample), LagrangeMultipliers{}, tol);
}

FenchelReport verify_fenchel_mle(const StepDistribution& F, const Sample2& sample, double tol) {
  const GridProcess w = mle_process(F, sample);
  return certify(F, w, lagrange_multipliers(F, sample, w), tol);
}

std::string FenchelReport::to_json() const {
  nlohmann::ordered_json j;
  j["min_slack"] = min_slack;
  j["equality_residual"] = equality_residual;
  j["lambda1"] = lambda1;
  j["lambda2"] = lambda2;
  j["tol"] = tol;
  j["pass"] = pass;
  return j.dump(2);
}

}  // namespace intcens
