#include "intcens/asymptotics.hpp"

#include "intcens/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace intcens;

TEST_CASE("gauss-legendre rules integrate polynomials exactly") {
  const QuadratureRule r = gauss_legendre(16);
  CHECK(r.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
  for (int p = 0; p < 32; ++p) {
    const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
    CHECK(std::abs(r.weights.dot(r.nodes.array().pow(p).matrix()) - exact) <= 1e-13);
  }
  CHECK(integrate([](double x) { return std::exp(x); }, 0.0, 2.0) == doctest::Approx(std::expm1(2.0)).epsilon(1e-14));
  CHECK(composite_gauss_legendre(0.0, 1.0, 16, 16).nodes.size() == 256);
  CHECK_THROWS_AS(gauss_legendre(0), Error);
}

TEST_CASE("presets validate and reject unknown names") {
  for (const auto& name : model_preset_names()) CHECK_NOTHROW(model_preset(name).validate());
  CHECK_THROWS_AS(model_preset("gamma"), Error);
  ModelSpec broken = model_preset("uniform-[0,2]");
  broken.h = [](double u, double v) { return (u < v && v <= 2.0) ? 0.25 : 0.0; };
  CHECK_THROWS_AS(broken.validate(), Error);
}

TEST_CASE("truncated exponential density") {
  const ModelSpec m = model_preset("trunc-exp-[0,2]");
  CHECK(m.f0(0.5) == doctest::Approx(std::exp(-0.5) / (1.0 - std::exp(-2.0))));
  CHECK(m.quantile(0.0) == 0.0);
  CHECK(m.quantile(1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(m.F0(m.quantile(0.3)) == doctest::Approx(0.3));
}

TEST_CASE("marginals match closed forms") {
  for (const char* name : {"trunc-exp-[0,2]", "uniform-[0,2]"}) {
    const ModelSpec m = model_preset(name);
    for (double t = 0.05; t < 2.0; t += 0.05) {
      CHECK(std::abs(marginal_h1(m, t) - (2.0 - t) / 2.0) <= 1e-8);
      CHECK(std::abs(marginal_h2(m, t) - t / 2.0) <= 1e-8);
      CHECK(drift_b(t, m) == doctest::Approx(1.0));
      CHECK(drift_b_simple(t, m) == doctest::Approx(0.25));
    }
  }
  const ModelSpec tri = model_preset("triangle-[0,1]");
  for (double t = 0.05; t < 1.0; t += 0.05) CHECK(std::abs(marginal_h1(tri, t) - 2.0 * (1.0 - t)) <= 1e-8);
}

TEST_CASE("scale a at the center of the uniform model") {
  const ModelSpec m = model_preset("uniform-[0,2]");
  const auto terms = scale_a_terms(1.0, m);
  CHECK(terms[0] == doctest::Approx(0.25));
  CHECK(terms[1] == doctest::Approx(1.0 / 12.0));
  CHECK(terms[2] == doctest::Approx(1.0 / 12.0));
  CHECK(terms[3] == doctest::Approx(0.125));
  CHECK(terms[4] == doctest::Approx(0.125));
  CHECK(scale_a(1.0, m) * scale_a(1.0, m) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(scale_a_simple(1.0, m) == doctest::Approx(0.5));
  CHECK(sigma(1.0, m, Variant::Full) == doctest::Approx(std::cbrt(std::sqrt(2.0 / 3.0) * 0.5)).epsilon(1e-12));
  CHECK(sigma(1.0, m, Variant::Full) == doctest::Approx(0.7418).epsilon(1e-4));
  CHECK(sigma(1.0, m, Variant::Simple) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(scale_a(0.0, m), Error);
  CHECK_THROWS_AS(scale_a(2.0, m), Error);
}

TEST_CASE("scale terms are nonnegative and dominate the first term") {
  for (const auto& name : model_preset_names()) {
    const ModelSpec m = model_preset(name);
    for (int i = 1; i < 20; ++i) {
      const double t = m.M * i / 20.0;
      const auto terms = scale_a_terms(t, m);
      for (double x : terms) CHECK(x >= 0.0);
      const double F = m.F0(t);
      CHECK(scale_a(t, m) * scale_a(t, m) >= F * (1 - F) * drift_b(t, m) - 1e-15);
    }
  }
}

TEST_CASE("symmetric model gives symmetric a and sigma") {
  for (const char* name : {"uniform-[0,2]", "triangle-[0,1]"}) {
    const ModelSpec m = model_preset(name);
    for (int i = 1; i < 10; ++i) {
      const double t = m.M * i / 20.0;
      CHECK(scale_a(t, m) == doctest::Approx(scale_a(m.M - t, m)).epsilon(1e-12));
      CHECK(sigma(t, m, Variant::Full) == doctest::Approx(sigma(m.M - t, m, Variant::Full)).epsilon(1e-12));
    }
  }
}

TEST_CASE("halving the quadrature step leaves a unchanged") {
  for (const auto& name : model_preset_names()) {
    const ModelSpec m = model_preset(name);
    for (int i = 1; i < 20; ++i) {
      const double t = m.M * i / 20.0;
      CHECK(std::abs(scale_a(t, m) - scale_a(t, m, QuadratureSpec{32, 16})) < 1e-6);
    }
  }
}

TEST_CASE("simple variant has the larger average limit variance on Example-1 models") {
  // pointwise the curves can cross close to M, where 1 - F0 is small
  for (const char* name : {"trunc-exp-[0,2]", "uniform-[0,2]"}) {
    const ModelSpec m = model_preset(name);
    std::vector<double> grid;
    for (int i = 1; i < 40; ++i) grid.push_back(i * 0.05);
    const auto full = theoretical_variance_curve(m, grid, Variant::Full, 0.26);
    const auto simple = theoretical_variance_curve(m, grid, Variant::Simple, 0.26);
    double sum_full = 0.0;
    double sum_simple = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      sum_full += full[i].var_limit;
      sum_simple += simple[i].var_limit;
    }
    CHECK(sum_simple > sum_full);
    CHECK(simple[19].var_limit > full[19].var_limit);
  }
}

TEST_CASE("theoretical curve") {
  const ModelSpec m = model_preset("uniform-[0,2]");
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(0.1 * i);
  const auto c = theoretical_variance_curve(m, grid, Variant::Full, 0.25);
  CHECK(c[9].var_limit == doctest::Approx(std::pow(sigma(1.0, m, Variant::Full), 2) * 0.25));
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(c[i].var_limit == doctest::Approx(c[grid.size() - 1 - i].var_limit).epsilon(1e-10));
  std::ostringstream out;
  write_curve_csv(out, {c[9]});
  CHECK(out.str().rfind("t,sigma,var_limit\n1,0.74", 0) == 0);
  CHECK_THROWS_AS(theoretical_variance_curve(m, {2.5}, Variant::Full, 0.25), Error);
  CHECK(parse_variant("simple") == Variant::Simple);
  CHECK_THROWS_AS(parse_variant("both"), Error);
}

TEST_CASE("chernoff argmin is centered and localized") {
  ChernoffOptions o;
  o.paths = 20000;
  o.seed = 5;
  const ChernoffEstimate e = chernoff_variance(o);
  CHECK(std::abs(e.mean) <= 3.0 * e.mean_stderr);
  CHECK(e.variance > 0.2);
  CHECK(e.variance < 0.33);

  // Same seed, longer horizon: the paths share their first 2500 increments.
  o.horizon = 5.0;
  const ChernoffEstimate wide = chernoff_variance(o);
  CHECK(std::abs(wide.variance - e.variance) < e.variance_stderr);
}

TEST_CASE("chernoff variance at default settings is stable across seeds") {
  ChernoffOptions a;
  a.cache_path = default_chernoff_cache();
  ChernoffOptions b = a;
  b.seed = 2;
  const ChernoffEstimate ea = chernoff_variance(a);
  const ChernoffEstimate eb = chernoff_variance(b);
  MESSAGE("Var(Z) seeds 1, 2: " << ea.variance << " +- " << ea.variance_stderr << ", " << eb.variance << " +- "
                                << eb.variance_stderr);
  CHECK(std::abs(ea.variance - eb.variance) <= 4.0 * std::hypot(ea.variance_stderr, eb.variance_stderr));
  CHECK(ea.variance_stderr < 2e-3);
  // The cache returns the identical estimate.
  const ChernoffEstimate again = chernoff_variance(a);
  CHECK(again.from_cache);
  CHECK(again.variance == ea.variance);
}

TEST_CASE("chernoff is thread invariant and deterministic") {
  ChernoffOptions o;
  o.paths = 500;
  o.threads = 1;
  const ChernoffEstimate one = chernoff_variance(o);
  o.threads = 3;
  const ChernoffEstimate three = chernoff_variance(o);
  CHECK(one.variance == three.variance);
  CHECK(one.mean == three.mean);
  o.paths = 0;
  CHECK_THROWS_AS(chernoff_variance(o), Error);
}
