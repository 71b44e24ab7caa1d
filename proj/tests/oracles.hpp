#pragma once

// Reference computations that share no code with the library.

#include "intcens/data.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <vector>

namespace oracle {

using intcens::Index;
using intcens::VectorXd;

// Left derivatives of the greatest convex minorant via the lower convex hull
// (monotone chain).
inline VectorXd hull_left_slopes(const VectorXd& x, const VectorXd& y) {
  std::vector<Index> hull;
  for (Index i = 0; i < x.size(); ++i) {
    while (hull.size() >= 2) {
      const Index a = hull[hull.size() - 2];
      const Index b = hull.back();
      const long double cross = static_cast<long double>(x[b] - x[a]) * (y[i] - y[a]) -
                                static_cast<long double>(y[b] - y[a]) * (x[i] - x[a]);
      if (cross <= 0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(i);
  }
  VectorXd slopes(x.size() - 1);
  for (std::size_t h = 1; h < hull.size(); ++h) {
    const Index a = hull[h - 1];
    const Index b = hull[h];
    const double s = (y[b] - y[a]) / (x[b] - x[a]);
    for (Index i = a; i < b; ++i) slopes[i] = s;
  }
  return slopes;
}

// Residual form of the three-term criterion: || A y - b ||^2 with three rows
// per observation.
struct LeastSquaresForm {
  Eigen::MatrixXd A;
  VectorXd b;
};

inline LeastSquaresForm ls_form(const intcens::Sample2& s) {
  const Index K = s.grid_size();
  LeastSquaresForm f{Eigen::MatrixXd::Zero(3 * s.size(), K), VectorXd::Zero(3 * s.size())};
  for (Index i = 0; i < s.size(); ++i) {
    const auto& o = s[i];
    const auto pos = [&](double t) {
      return static_cast<Index>(std::find(s.times().data(), s.times().data() + K, t) - s.times().data());
    };
    const Index ku = pos(o.u);
    const Index kv = pos(o.v);
    f.A(3 * i, ku) = 1.0;
    f.b[3 * i] = o.d0;
    f.A(3 * i + 1, kv) += 1.0;
    f.A(3 * i + 1, ku) -= 1.0;
    f.b[3 * i + 1] = o.d1;
    f.A(3 * i + 2, kv) = 1.0;
    f.b[3 * i + 2] = o.d0 + o.d1;
  }
  return f;
}

// Exact minimizer of the three-term criterion over 0 <= y_1 <= ... <= y_K <= 1
// by enumerating every block partition of the grid, with the first block
// optionally pinned at 0 and the last at 1, solving the unconstrained least
// squares problem in the remaining block values, and keeping the best feasible
// candidate. The optimum is one of these candidates.
inline VectorXd ls_full_by_enumeration(const intcens::Sample2& s) {
  const LeastSquaresForm f = ls_form(s);
  const Index K = s.grid_size();
  double best = std::numeric_limits<double>::infinity();
  VectorXd best_y;
  for (unsigned long mask = 0; mask < (1ul << (K - 1)); ++mask) {
    std::vector<Index> starts{0};
    for (Index k = 1; k < K; ++k)
      if (mask & (1ul << (k - 1))) starts.push_back(k);
    starts.push_back(K);
    const Index B = static_cast<Index>(starts.size()) - 1;
    for (int pin_low = 0; pin_low < 2; ++pin_low) {
      for (int pin_high = 0; pin_high < 2; ++pin_high) {
        if (B == 1 && pin_low && pin_high) continue;
        VectorXd fixed = VectorXd::Zero(K);
        std::vector<Index> free_blocks;
        for (Index b = 0; b < B; ++b) {
          if (b == 0 && pin_low) continue;
          if (b == B - 1 && pin_high) {
            fixed.segment(starts[b], starts[b + 1] - starts[b]).setOnes();
            continue;
          }
          free_blocks.push_back(b);
        }
        Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(K, static_cast<Index>(free_blocks.size()));
        for (std::size_t j = 0; j < free_blocks.size(); ++j) {
          const Index b = free_blocks[j];
          basis.col(static_cast<Index>(j)).segment(starts[b], starts[b + 1] - starts[b]).setOnes();
        }
        VectorXd y = fixed;
        if (!free_blocks.empty()) {
          const Eigen::MatrixXd AB = f.A * basis;
          const VectorXd z = AB.colPivHouseholderQr().solve(f.b - f.A * fixed);
          y += basis * z;
        }
        bool ok = y.minCoeff() >= -1e-12 && y.maxCoeff() <= 1.0 + 1e-12;
        for (Index k = 1; k < K && ok; ++k) ok = y[k] >= y[k - 1] - 1e-12;
        if (!ok) continue;
        const double val = (f.A * y - f.b).squaredNorm();
        if (val < best) {
          best = val;
          best_y = y;
        }
      }
    }
  }
  return best_y;
}

// Brute-force grid search of the three-term criterion over nondecreasing
// vectors with entries in {0, h, 2h, ..., 1}; for small K only.
inline VectorXd ls_full_by_grid(const intcens::Sample2& s, int steps) {
  const LeastSquaresForm f = ls_form(s);
  const Index K = s.grid_size();
  std::vector<int> idx(static_cast<std::size_t>(K), 0);
  VectorXd y(K);
  VectorXd best_y;
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    for (Index k = 0; k < K; ++k) y[k] = static_cast<double>(idx[static_cast<std::size_t>(k)]) / steps;
    const double val = (f.A * y - f.b).squaredNorm();
    if (val < best) {
      best = val;
      best_y = y;
    }
    // next nondecreasing index vector
    Index k = K - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == steps) --k;
    if (k < 0) break;
    const int next = idx[static_cast<std::size_t>(k)] + 1;
    for (Index j = k; j < K; ++j) idx[static_cast<std::size_t>(j)] = next;
  }
  return best_y;
}

}  // namespace oracle
