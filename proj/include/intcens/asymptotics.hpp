#pragma once

// Limit theory for the least-squares estimators: the scale a, drift b and
// sigma = (a f0 / b)^(1/3) such that n^(1/3){F_n(t0) - F0(t0)}/sigma
// converges to the argmin Z of two-sided Brownian motion plus t^2.

#include "intcens/data.hpp"
#include "intcens/quadrature.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace intcens {

/// Event-time distribution F0 with density f0 and quantile function, and the
/// density h of the inspection pair on {0 <= u < v <= M}.
struct ModelSpec {
  std::string name;
  double M = 1.0;
  std::function<double(double)> F0;
  std::function<double(double)> f0;
  std::function<double(double)> quantile;
  std::function<double(double, double)> h;

  /// Positivity of f0 and h on interior probe points and unit mass of h.
  void validate(const QuadratureSpec& q = {}) const;
};

/// "trunc-exp-[0,2]", "uniform-[0,2]" or "triangle-[0,1]".
ModelSpec model_preset(const std::string& name);
std::vector<std::string> model_preset_names();

/// h1(t) = int_t^M h(t, v) dv
double marginal_h1(const ModelSpec& m, double t, const QuadratureSpec& q = {});
/// h2(t) = int_0^t h(u, t) du
double marginal_h2(const ModelSpec& m, double t, const QuadratureSpec& q = {});

/// The five nonnegative terms whose sum is a(t0)^2.
std::array<double, 5> scale_a_terms(double t0, const ModelSpec& m, const QuadratureSpec& q = {});
double scale_a(double t0, const ModelSpec& m, const QuadratureSpec& q = {});
double drift_b(double t0, const ModelSpec& m, const QuadratureSpec& q = {});
double scale_a_simple(double t0, const ModelSpec& m, const QuadratureSpec& q = {});
double drift_b_simple(double t0, const ModelSpec& m, const QuadratureSpec& q = {});

enum class Variant { Full, Simple };
Variant parse_variant(const std::string& s);
std::string to_string(Variant v);

double sigma(double t0, const ModelSpec& m, Variant v, const QuadratureSpec& q = {});

struct ChernoffOptions {
  std::int64_t paths = 100000;
  double horizon = 2.5;
  double step = 1e-3;
  std::uint64_t seed = 1;
  int threads = 0;
  /// File holding previously computed (T, dt, paths, seed) results; empty
  /// disables caching.
  std::string cache_path;

  void validate() const;
};

struct ChernoffEstimate {
  double mean = 0.0;
  double mean_stderr = 0.0;
  double variance = 0.0;
  double variance_stderr = 0.0;
  std::int64_t paths = 0;
  bool from_cache = false;
};

/// Monte Carlo estimate of the law of argmin_{|t| <= T} {W(t) + t^2} with W a
/// two-sided standard Brownian motion sampled on the grid k * dt.
ChernoffEstimate chernoff_variance(const ChernoffOptions& opts);

/// Default cache location: $INTCENS_CACHE_DIR/chernoff.csv, else
/// $XDG_CACHE_HOME/intcens/chernoff.csv, else ~/.cache/intcens/chernoff.csv.
std::string default_chernoff_cache();

struct CurvePoint {
  double t = 0.0;
  double sigma = 0.0;
  double var_limit = 0.0;
};

/// sigma(t)^2 * Var(Z) at each grid time: the limit of n^(2/3) var F_n(t).
std::vector<CurvePoint> theoretical_variance_curve(const ModelSpec& m, const std::vector<double>& grid,
                                                   Variant v, double var_z, const QuadratureSpec& q = {});

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace intcens
