#pragma once

// Pool-adjacent-violators and greatest-convex-minorant kernels.

#include "intcens/data.hpp"

#include <Eigen/Core>

#include <vector>

namespace intcens {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Weighted least-squares projection onto nondecreasing sequences, together
/// with the pooled block structure.
template <typename Scalar>
struct IsotonicFit {
  VectorX<Scalar> fitted;
  /// First index of every pooled block, followed by fitted.size().
  std::vector<Index> block_starts;

  Index blocks() const { return static_cast<Index>(block_starts.size()) - 1; }
};

template <typename DerivedV, typename DerivedW>
IsotonicFit<typename DerivedV::Scalar> pava_blocks(const Eigen::MatrixBase<DerivedV>& values,
                                                   const Eigen::MatrixBase<DerivedW>& weights) {
  using Scalar = typename DerivedV::Scalar;
  const Index n = values.size();
  if (n == 0) throw Error("pava: empty input");
  if (weights.size() != n) throw Error("pava: values and weights differ in length");

  struct Block {
    Scalar wsum;
    Scalar wysum;
    Index start;
    Scalar mean() const { return wysum / wsum; }
  };
  std::vector<Block> stack;
  stack.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Scalar w = weights[i];
    if (!(w > Scalar(0))) throw Error("pava: weights must be positive");
    stack.push_back({w, w * values[i], i});
    while (stack.size() > 1 && stack[stack.size() - 2].mean() >= stack.back().mean()) {
      Block top = stack.back();
      stack.pop_back();
      stack.back().wsum += top.wsum;
      stack.back().wysum += top.wysum;
    }
  }

  IsotonicFit<Scalar> out;
  out.fitted.resize(n);
  out.block_starts.reserve(stack.size() + 1);
  for (std::size_t b = 0; b < stack.size(); ++b) {
    const Index end = b + 1 < stack.size() ? stack[b + 1].start : n;
    out.fitted.segment(stack[b].start, end - stack[b].start).setConstant(stack[b].mean());
    out.block_starts.push_back(stack[b].start);
  }
  out.block_starts.push_back(n);
  return out;
}

/// Isotonic regression of `values` with positive `weights`.
template <typename DerivedV, typename DerivedW>
VectorX<typename DerivedV::Scalar> pava(const Eigen::MatrixBase<DerivedV>& values,
                                        const Eigen::MatrixBase<DerivedW>& weights) {
  return pava_blocks(values, weights).fitted;
}

template <typename DerivedV>
VectorX<typename DerivedV::Scalar> pava(const Eigen::MatrixBase<DerivedV>& values) {
  return pava_blocks(values, VectorX<typename DerivedV::Scalar>::Ones(values.size())).fitted;
}

/// Points (x_i, y_i), i = 0..K, starting at the origin with x strictly
/// increasing.
template <typename Scalar>
class CusumDiagram {
 public:
  CusumDiagram(VectorX<Scalar> x, VectorX<Scalar> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size()) throw Error("cusum diagram: coordinate lengths differ");
    if (x_.size() < 2) throw Error("cusum diagram needs at least one point besides the origin");
    if (x_[0] != Scalar(0) || y_[0] != Scalar(0)) throw Error("cusum diagram must start at the origin");
    for (Index i = 1; i < x_.size(); ++i)
      if (!(x_[i] > x_[i - 1])) throw Error("cusum diagram x must be strictly increasing");
  }

  /// Diagram through the partial sums of the given increments.
  static CusumDiagram from_increments(const VectorX<Scalar>& dx, const VectorX<Scalar>& dy) {
    VectorX<Scalar> x = VectorX<Scalar>::Zero(dx.size() + 1);
    VectorX<Scalar> y = VectorX<Scalar>::Zero(dy.size() + 1);
    for (Index i = 0; i < dx.size(); ++i) {
      x[i + 1] = x[i] + dx[i];
      y[i + 1] = y[i] + dy[i];
    }
    return CusumDiagram(std::move(x), std::move(y));
  }

  Index points() const { return x_.size() - 1; }
  const VectorX<Scalar>& x() const { return x_; }
  const VectorX<Scalar>& y() const { return y_; }

 private:
  VectorX<Scalar> x_;
  VectorX<Scalar> y_;
};

/// Left derivative of the greatest convex minorant at x_1..x_K.
///
/// Computed as the weighted isotonic regression of the chord slopes with the
/// x-increments as weights; no geometric hull is built.
template <typename Scalar>
VectorX<Scalar> gcm_left_slopes(const CusumDiagram<Scalar>& diagram) {
  const Index k = diagram.points();
  const VectorX<Scalar> dx = diagram.x().tail(k) - diagram.x().head(k);
  const VectorX<Scalar> dy = diagram.y().tail(k) - diagram.y().head(k);
  return pava(dy.cwiseQuotient(dx), dx);
}

}  // namespace intcens
