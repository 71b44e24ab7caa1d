#pragma once

// Criteria over the vector y_k = F(t_k) of grid values. Every observation adds
// f0(y_u) + f1(y_v - y_u) + f2(y_v), so gradients and Hessians have at most
// one off-diagonal coupling per observation.

#include "intcens/data.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <vector>

namespace intcens::detail {

struct TermDerivatives {
  double ga = 0.0;
  double gb = 0.0;
  double haa = 0.0;
  double hab = 0.0;
  double hbb = 0.0;
};

struct LeastSquaresTerms {
  static double value(const Observation2& o, double a, double b) {
    const double r0 = a - o.d0;
    const double r1 = b - a - o.d1;
    const double r2 = b - o.d0 - o.d1;
    return r0 * r0 + r1 * r1 + r2 * r2;
  }
  static TermDerivatives derivatives(const Observation2& o, double a, double b) {
    const double r0 = a - o.d0;
    const double r1 = b - a - o.d1;
    const double r2 = b - o.d0 - o.d1;
    return {2.0 * (r0 - r1), 2.0 * (r1 + r2), 4.0, -2.0, 4.0};
  }
};

/// Negative case-2 log-likelihood; +inf outside its domain.
struct NegLogLikTerms {
  static double value(const Observation2& o, double a, double b) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    double s = 0.0;
    if (o.d0) {
      if (!(a > 0.0)) return inf;
      s -= std::log(a);
    }
    if (o.d1) {
      if (!(b - a > 0.0)) return inf;
      s -= std::log(b - a);
    }
    if (o.d2()) {
      if (!(b < 1.0)) return inf;
      s -= std::log1p(-b);
    }
    return s;
  }
  static TermDerivatives derivatives(const Observation2& o, double a, double b) {
    TermDerivatives t;
    if (o.d0) {
      t.ga -= 1.0 / a;
      t.haa += 1.0 / (a * a);
    }
    if (o.d1) {
      const double w = b - a;
      const double c = 1.0 / (w * w);
      t.ga += 1.0 / w;
      t.gb -= 1.0 / w;
      t.haa += c;
      t.hbb += c;
      t.hab -= c;
    }
    if (o.d2()) {
      const double w = 1.0 - b;
      t.gb += 1.0 / w;
      t.hbb += 1.0 / (w * w);
    }
    return t;
  }
};

template <typename Terms>
class GridObjective {
 public:
  explicit GridObjective(const Sample2& sample) : s_(sample) {}

  const Sample2& sample() const { return s_; }

  double value(const VectorXd& y) const {
    double total = 0.0;
    for (Index i = 0; i < s_.size(); ++i) total += Terms::value(s_[i], y[s_.u_index(i)], y[s_.v_index(i)]);
    return std::isnan(total) ? std::numeric_limits<double>::infinity() : total;
  }

  /// Gradient and Hessian diagonal.
  void gradient(const VectorXd& y, VectorXd& g, VectorXd& diag) const {
    g.setZero(y.size());
    diag.setZero(y.size());
    for (Index i = 0; i < s_.size(); ++i) {
      const Index ku = s_.u_index(i);
      const Index kv = s_.v_index(i);
      const TermDerivatives t = Terms::derivatives(s_[i], y[ku], y[kv]);
      g[ku] += t.ga;
      g[kv] += t.gb;
      diag[ku] += t.haa;
      diag[kv] += t.hbb;
    }
  }

  /// Gradient and Hessian with respect to the common values of the free
  /// blocks; block_of[k] < 0 marks a grid point held fixed.
  void block_system(const VectorXd& y, const std::vector<Index>& block_of, Index blocks, VectorXd& g,
                    Eigen::MatrixXd& H) const {
    g.setZero(blocks);
    H.setZero(blocks, blocks);
    for (Index i = 0; i < s_.size(); ++i) {
      const Index ku = s_.u_index(i);
      const Index kv = s_.v_index(i);
      const Index bu = block_of[static_cast<std::size_t>(ku)];
      const Index bv = block_of[static_cast<std::size_t>(kv)];
      if (bu < 0 && bv < 0) continue;
      const TermDerivatives t = Terms::derivatives(s_[i], y[ku], y[kv]);
      if (bu >= 0) {
        g[bu] += t.ga;
        H(bu, bu) += t.haa;
      }
      if (bv >= 0) {
        g[bv] += t.gb;
        H(bv, bv) += t.hbb;
      }
      if (bu >= 0 && bv >= 0) {
        H(bu, bv) += t.hab;
        H(bv, bu) += t.hab;
      }
    }
  }

  /// Calls emit(row, col, value) for every Hessian contribution.
  template <typename Emit>
  void hessian_entries(const VectorXd& y, Emit emit) const {
    for (Index i = 0; i < s_.size(); ++i) {
      const Index ku = s_.u_index(i);
      const Index kv = s_.v_index(i);
      const TermDerivatives t = Terms::derivatives(s_[i], y[ku], y[kv]);
      emit(ku, ku, t.haa);
      emit(kv, kv, t.hbb);
      emit(ku, kv, t.hab);
      emit(kv, ku, t.hab);
    }
  }

  VectorXd full_gradient(const VectorXd& y) const {
    VectorXd g;
    VectorXd d;
    gradient(y, g, d);
    return g;
  }

 private:
  const Sample2& s_;
};

}  // namespace intcens::detail
