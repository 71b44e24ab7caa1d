#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace intcens {

using Eigen::Index;
using Eigen::VectorXd;

/// Thrown for invalid input data and violated preconditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One interval-censored record: inspection times u < v and the indicators
/// d0 = [X <= u], d1 = [u < X <= v].
struct Observation2 {
  double u = 0.0;
  double v = 0.0;
  int d0 = 0;
  int d1 = 0;

  int d2() const { return 1 - d0 - d1; }
  friend bool operator==(const Observation2&, const Observation2&) = default;
};

struct CurrentStatusObservation {
  double t = 0.0;
  int delta = 0;
};

/// Throws Error when the record breaks 0 <= u < v or the indicator rules.
void validate(const Observation2& obs);

enum class Endpoint : std::uint8_t { U, V };

/// Back-reference from a grid time to the observation endpoint sitting there.
struct GridRef {
  Index obs = 0;
  Endpoint end = Endpoint::U;
};

/// A validated case-2 sample together with its merged observation grid.
///
/// The grid holds the distinct values among all u and v, sorted strictly
/// increasing. Tied endpoints share one grid index; each index keeps the list
/// of endpoints that landed on it.
class Sample2 {
 public:
  explicit Sample2(std::vector<Observation2> obs, std::optional<double> upper = std::nullopt);

  Index size() const { return static_cast<Index>(obs_.size()); }
  const std::vector<Observation2>& observations() const { return obs_; }
  const Observation2& operator[](Index i) const { return obs_[static_cast<std::size_t>(i)]; }

  /// Upper end M of the support; defaults to the largest v.
  double upper() const { return upper_; }

  const VectorXd& times() const { return times_; }
  Index grid_size() const { return times_.size(); }

  Index u_index(Index i) const { return u_idx_[static_cast<std::size_t>(i)]; }
  Index v_index(Index i) const { return v_idx_[static_cast<std::size_t>(i)]; }

  std::span<const GridRef> refs(Index k) const;
  /// Number of endpoints merged into grid index k.
  Index multiplicity(Index k) const { return ref_offsets_[k + 1] - ref_offsets_[k]; }

 private:
  std::vector<Observation2> obs_;
  double upper_ = 0.0;
  VectorXd times_;
  std::vector<Index> u_idx_;
  std::vector<Index> v_idx_;
  std::vector<GridRef> refs_;
  std::vector<Index> ref_offsets_;
};

/// Nondecreasing right-continuous step function with values in [0, 1].
/// F(t) = values[j] for the largest knots[j] <= t, and 0 left of the first knot.
class StepDistribution {
 public:
  StepDistribution() = default;
  StepDistribution(VectorXd knots, VectorXd values);

  /// Values at the grid times of a sample, after clamping rounding noise
  /// outside [0, 1].
  static StepDistribution on_grid(const Sample2& sample, VectorXd values);

  double operator()(double t) const;
  VectorXd operator()(const VectorXd& t) const;

  const VectorXd& knots() const { return knots_; }
  const VectorXd& values() const { return values_; }
  Index size() const { return knots_.size(); }

  /// Locations and sizes of the strictly positive jumps.
  struct Masses {
    VectorXd points;
    VectorXd masses;
  };
  Masses masses() const;

 private:
  VectorXd knots_;
  VectorXd values_;
};

/// sup_t |F(t) - G(t)| over [0, upper] for a step function F and a continuous
/// nondecreasing G.
template <typename Cdf>
double sup_distance(const StepDistribution& F, const Cdf& G, double upper);

// ---------------------------------------------------------------------------
// CSV

/// Parses "u,v,d0,d1" or "u,v,x" rows; a non-numeric first row is a header.
Sample2 parse_csv(std::istream& in, std::optional<double> upper = std::nullopt);
Sample2 ingest_csv(const std::string& path, std::optional<double> upper = std::nullopt);

/// Writes the sample as 4-column rows with shortest round-trip formatting.
void write_csv(const Sample2& sample, std::ostream& out);

/// Step function CSV with columns t,F.
void write_step_csv(const StepDistribution& F, std::ostream& out);
StepDistribution read_step_csv(std::istream& in);

/// Reads "t,delta" rows; a non-numeric first row is a header.
std::vector<CurrentStatusObservation> parse_current_status_csv(std::istream& in);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double x);

// ---------------------------------------------------------------------------

template <typename Cdf>
double sup_distance(const StepDistribution& F, const Cdf& G, double upper) {
  const VectorXd& w = F.knots();
  const VectorXd& y = F.values();
  double left = 0.0;
  double level = 0.0;
  double worst = 0.0;
  for (Index j = 0; j <= w.size(); ++j) {
    const double right = j < w.size() ? std::min(w[j], upper) : upper;
    if (right > left || j == w.size()) {
      worst = std::max(worst, std::abs(level - G(left)));
      worst = std::max(worst, std::abs(level - G(right)));
    }
    if (j < w.size()) {
      left = right;
      level = y[j];
    }
  }
  return worst;
}

}  // namespace intcens
