#pragma once

#include "intcens/data.hpp"
#include "intcens/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace test {

using intcens::Index;
using intcens::Observation2;
using intcens::Rng;
using intcens::Sample2;
using intcens::VectorXd;

// Small samples with deliberately coarse times so that ties occur.
inline Sample2 random_sample(Rng& rng, Index n, int resolution = 0) {
  std::vector<Observation2> obs;
  while (static_cast<Index>(obs.size()) < n) {
    double u = intcens::uniform01(rng);
    double v = intcens::uniform01(rng);
    if (resolution > 0) {
      u = std::floor(u * resolution) / resolution;
      v = std::floor(v * resolution) / resolution;
    }
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    const double x = intcens::uniform01(rng);
    obs.push_back({u, v, x <= u, u < x && x <= v});
  }
  return Sample2(std::move(obs), 1.0);
}

// Random nondecreasing vector with entries in [0, 1], with exact 0s and 1s
// appearing often.
inline VectorXd random_monotone(Rng& rng, Index K) {
  VectorXd y(K);
  for (Index k = 0; k < K; ++k) y[k] = std::clamp(1.4 * intcens::uniform01(rng) - 0.2, 0.0, 1.0);
  std::sort(y.data(), y.data() + K);
  return y;
}

inline double sup_diff_on_grid(const intcens::StepDistribution& F, const intcens::StepDistribution& G,
                               const VectorXd& times) {
  double d = 0.0;
  for (Index k = 0; k < times.size(); ++k) d = std::max(d, std::abs(F(times[k]) - G(times[k])));
  return d;
}

}  // namespace test
