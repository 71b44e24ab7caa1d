#include "intcens/asymptotics.hpp"

#include "intcens/data.hpp"
#include "intcens/parallel.hpp"
#include "intcens/rng.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace intcens {

void ModelSpec::validate(const QuadratureSpec& q) const {
  if (!(M > 0.0) || !std::isfinite(M)) throw Error("model " + name + ": support endpoint must be positive");
  if (!F0 || !f0 || !quantile || !h) throw Error("model " + name + ": missing component");
  for (int i = 1; i < 20; ++i) {
    const double t = M * i / 20.0;
    if (!(f0(t) > 0.0)) throw Error("model " + name + ": f0 must be positive on (0,M)");
    for (int j = i + 1; j < 20; ++j)
      if (!(h(t, M * j / 20.0) > 0.0)) throw Error("model " + name + ": h must be positive on the triangle");
  }
  const double mass = integrate([&](double t) { return marginal_h1(*this, t, q); }, 0.0, M, q);
  if (!(std::abs(mass - 1.0) <= 1e-6)) throw Error("model " + name + ": h does not integrate to 1");
}

ModelSpec model_preset(const std::string& name) {
  ModelSpec m;
  m.name = name;
  if (name == "trunc-exp-[0,2]") {
    const double c = -std::expm1(-2.0);
    m.M = 2.0;
    m.F0 = [c](double x) { return x <= 0.0 ? 0.0 : (x >= 2.0 ? 1.0 : -std::expm1(-x) / c); };
    m.f0 = [c](double x) { return (x < 0.0 || x > 2.0) ? 0.0 : std::exp(-x) / c; };
    m.quantile = [c](double w) { return -std::log1p(-w * c); };
    m.h = [](double u, double v) { return (0.0 <= u && u < v && v <= 2.0) ? 0.5 : 0.0; };
  } else if (name == "uniform-[0,2]") {
    m.M = 2.0;
    m.F0 = [](double x) { return std::clamp(x / 2.0, 0.0, 1.0); };
    m.f0 = [](double x) { return (x < 0.0 || x > 2.0) ? 0.0 : 0.5; };
    m.quantile = [](double w) { return 2.0 * w; };
    m.h = [](double u, double v) { return (0.0 <= u && u < v && v <= 2.0) ? 0.5 : 0.0; };
  } else if (name == "triangle-[0,1]") {
    m.M = 1.0;
    m.F0 = [](double x) { return std::clamp(x, 0.0, 1.0); };
    m.f0 = [](double x) { return (x < 0.0 || x > 1.0) ? 0.0 : 1.0; };
    m.quantile = [](double w) { return w; };
    m.h = [](double u, double v) { return (0.0 <= u && u < v && v <= 1.0) ? 2.0 : 0.0; };
  } else {
    throw Error("unknown model '" + name + "'");
  }
  return m;
}

std::vector<std::string> model_preset_names() { return {"trunc-exp-[0,2]", "uniform-[0,2]", "triangle-[0,1]"}; }

namespace {

void check_t0(double t0, const ModelSpec& m) {
  if (!(t0 > 0.0 && t0 < m.M)) throw Error("t0 must lie in (0, M)");
}

double finite_or_throw(double x, const char* what) {
  if (!std::isfinite(x)) throw Error(std::string(what) + ": quadrature result is not finite");
  return x;
}

}  // namespace

double marginal_h1(const ModelSpec& m, double t, const QuadratureSpec& q) {
  return finite_or_throw(integrate([&](double v) { return m.h(t, v); }, t, m.M, q), "h1");
}

double marginal_h2(const ModelSpec& m, double t, const QuadratureSpec& q) {
  return finite_or_throw(integrate([&](double u) { return m.h(u, t); }, 0.0, t, q), "h2");
}

std::array<double, 5> scale_a_terms(double t0, const ModelSpec& m, const QuadratureSpec& q) {
  check_t0(t0, m);
  const double F = m.F0(t0);
  const double b = marginal_h1(m, t0, q) + marginal_h2(m, t0, q);
  std::array<double, 5> terms{};
  terms[0] = F * (1.0 - F) * b;
  terms[1] = integrate(
      [&](double v) {
        const double d = m.F0(v) - F;
        return d * (1.0 - d) * m.h(t0, v);
      },
      t0, m.M, q);
  terms[2] = integrate(
      [&](double u) {
        const double d = F - m.F0(u);
        return d * (1.0 - d) * m.h(u, t0);
      },
      0.0, t0, q);
  terms[3] = 2.0 * F * integrate([&](double v) { return (m.F0(v) - F) * m.h(t0, v); }, t0, m.M, q);
  terms[4] = 2.0 * (1.0 - F) * integrate([&](double u) { return (F - m.F0(u)) * m.h(u, t0); }, 0.0, t0, q);
  for (double x : terms) finite_or_throw(x, "a^2");
  return terms;
}

double scale_a(double t0, const ModelSpec& m, const QuadratureSpec& q) {
  const auto terms = scale_a_terms(t0, m, q);
  const double a2 = terms[0] + terms[1] + terms[2] + terms[3] + terms[4];
  if (!(a2 >= 0.0)) throw Error("a^2 is negative");
  return std::sqrt(a2);
}

double drift_b(double t0, const ModelSpec& m, const QuadratureSpec& q) {
  check_t0(t0, m);
  return marginal_h1(m, t0, q) + marginal_h2(m, t0, q);
}

double drift_b_simple(double t0, const ModelSpec& m, const QuadratureSpec& q) { return drift_b(t0, m, q) / 4.0; }

double scale_a_simple(double t0, const ModelSpec& m, const QuadratureSpec& q) {
  const double F = m.F0(t0);
  return std::sqrt(F * (1.0 - F) * drift_b(t0, m, q));
}

Variant parse_variant(const std::string& s) {
  if (s == "full") return Variant::Full;
  if (s == "simple") return Variant::Simple;
  throw Error("variant must be 'full' or 'simple'");
}

std::string to_string(Variant v) { return v == Variant::Full ? "full" : "simple"; }

double sigma(double t0, const ModelSpec& m, Variant v, const QuadratureSpec& q) {
  const double f = m.f0(t0);
  if (v == Variant::Full) return std::cbrt(scale_a(t0, m, q) * f / drift_b(t0, m, q));
  return std::cbrt(scale_a_simple(t0, m, q) * f / drift_b_simple(t0, m, q));
}

// ---------------------------------------------------------------------------
// Chernoff constant

void ChernoffOptions::validate() const {
  if (paths < 1) throw Error("chernoff: paths must be >= 1");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw Error("chernoff: horizon must be positive");
  if (!(step > 0.0) || !(step <= horizon)) throw Error("chernoff: step must lie in (0, horizon]");
}

std::string default_chernoff_cache() {
  namespace fs = std::filesystem;
  if (const char* d = std::getenv("INTCENS_CACHE_DIR"); d && *d) return (fs::path(d) / "chernoff.csv").string();
  if (const char* d = std::getenv("XDG_CACHE_HOME"); d && *d)
    return (fs::path(d) / "intcens" / "chernoff.csv").string();
  if (const char* d = std::getenv("HOME"); d && *d)
    return (fs::path(d) / ".cache" / "intcens" / "chernoff.csv").string();
  return {};
}

namespace {

std::string cache_key(const ChernoffOptions& o) {
  return format_double(o.horizon) + "," + format_double(o.step) + "," + std::to_string(o.paths) + "," +
         std::to_string(o.seed);
}

std::optional<ChernoffEstimate> cache_lookup(const ChernoffOptions& o) {
  std::ifstream in(o.cache_path);
  if (!in) return std::nullopt;
  const std::string key = cache_key(o) + ",";
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key, 0) != 0) continue;
    std::istringstream rest(line.substr(key.size()));
    ChernoffEstimate e;
    char c1 = 0, c2 = 0, c3 = 0;
    if (rest >> e.mean >> c1 >> e.mean_stderr >> c2 >> e.variance >> c3 >> e.variance_stderr) {
      e.paths = o.paths;
      e.from_cache = true;
      return e;
    }
  }
  return std::nullopt;
}

void cache_store(const ChernoffOptions& o, const ChernoffEstimate& e) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path p(o.cache_path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  const bool fresh = !fs::exists(p, ec);
  std::ofstream out(p, std::ios::app);
  if (!out) return;  // caching is best effort
  if (fresh) out << "T,dt,paths,seed,mean,mean_se,var,var_se\n";
  out << cache_key(o) << ',' << format_double(e.mean) << ',' << format_double(e.mean_stderr) << ','
      << format_double(e.variance) << ',' << format_double(e.variance_stderr) << '\n';
}

// Argmin of W(t) + t^2 over the grid {k dt : |k| <= N}. Each side of the
// origin is a Brownian path from W(0) = 0 with its own stream, so paths for
// a longer horizon extend those for a shorter one.
double argmin_path(std::uint64_t seed, std::uint64_t path, Index N, double dt) {
  const double sd = std::sqrt(dt);
  double best = 0.0;
  double arg = 0.0;
  for (int side : {1, -1}) {
    Rng rng = make_rng(seed, 2 * path + (side > 0 ? 0 : 1));
    std::normal_distribution<double> normal;
    double w = 0.0;
    for (Index k = 1; k <= N; ++k) {
      w += sd * normal(rng);
      const double t = static_cast<double>(k) * dt;
      const double val = w + t * t;
      if (val < best) {
        best = val;
        arg = side * t;
      }
    }
  }
  return arg;
}

}  // namespace

ChernoffEstimate chernoff_variance(const ChernoffOptions& opts) {
  opts.validate();
  if (!opts.cache_path.empty())
    if (auto hit = cache_lookup(opts)) return *hit;

  const auto r = static_cast<std::size_t>(opts.paths);
  const auto N = static_cast<Index>(std::floor(opts.horizon / opts.step + 1e-9));
  std::vector<double> z(r);
  parallel_for(r, opts.threads, [&](std::size_t p) {
    z[p] = argmin_path(opts.seed, p, N, opts.step);
  });

  const Eigen::Map<const VectorXd> zs(z.data(), static_cast<Index>(r));
  ChernoffEstimate e;
  e.paths = opts.paths;
  e.mean = zs.mean();
  if (r >= 2) {
    const VectorXd c = zs.array() - e.mean;
    const double dr = static_cast<double>(r);
    e.variance = c.squaredNorm() / (dr - 1.0);
    e.mean_stderr = std::sqrt(e.variance / dr);
    const double m4 = c.array().pow(4).sum() / dr;
    const double v4 = m4 - e.variance * e.variance * (dr - 3.0) / (dr - 1.0);
    e.variance_stderr = std::sqrt(std::max(0.0, v4) / dr);
  }
  if (!opts.cache_path.empty()) cache_store(opts, e);
  return e;
}

std::vector<CurvePoint> theoretical_variance_curve(const ModelSpec& m, const std::vector<double>& grid, Variant v,
                                                   double var_z, const QuadratureSpec& q) {
  std::vector<CurvePoint> out;
  out.reserve(grid.size());
  for (double t : grid) {
    check_t0(t, m);
    const double s = sigma(t, m, v, q);
    out.push_back({t, s, s * s * var_z});
  }
  return out;
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "t,sigma,var_limit\n";
  for (const auto& p : curve)
    out << format_double(p.t) << ',' << format_double(p.sigma) << ',' << format_double(p.var_limit) << '\n';
}

}  // namespace intcens
