#include "intcens/estimators.hpp"

#include "intcens/isotonic.hpp"
#include "intcens/simulation.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <map>

using namespace intcens;

namespace {

Sample2 single(int d0, int d1) { return Sample2({{1.0, 2.0, d0, d1}}); }

void check_values(const StepDistribution& F, double a, double b) {
  CHECK(std::abs(F(1.0) - a) <= 1e-12);
  CHECK(std::abs(F(2.0) - b) <= 1e-12);
}

double sup_grid(const StepDistribution& F, const VectorXd& y, const Sample2& s) {
  return (F(s.times()) - y).lpNorm<Eigen::Infinity>();
}

}  // namespace

TEST_CASE("current status examples") {
  CHECK(fit_current_status({{1.0, 1}})(1.0) == 1.0);
  const auto F = fit_current_status({{1.0, 1}, {2.0, 0}});
  CHECK(F(1.0) == 0.5);
  CHECK(F(2.0) == 0.5);
  const auto G = fit_current_status({{2.0, 1}, {1.0, 0}});
  CHECK(G(1.0) == 0.0);
  CHECK(G(2.0) == 1.0);
  CHECK_THROWS_AS(fit_current_status({}), Error);
  CHECK_THROWS_AS(fit_current_status({{1.0, 2}}), Error);
}

TEST_CASE("current status (1,1),(2,0) agrees with a grid search") {
  double best = 1e300;
  double a_best = 0.0;
  double b_best = 0.0;
  for (int i = 0; i <= 1000; ++i)
    for (int j = i; j <= 1000; ++j) {
      const double a = i / 1000.0;
      const double b = j / 1000.0;
      const double c = (a - 1.0) * (a - 1.0) + b * b;
      if (c < best) {
        best = c;
        a_best = a;
        b_best = b;
      }
    }
  const auto F = fit_current_status({{1.0, 1}, {2.0, 0}});
  CHECK(std::abs(F(1.0) - a_best) <= 1e-3);
  CHECK(std::abs(F(2.0) - b_best) <= 1e-3);
}

TEST_CASE("current status ties merge into one knot") {
  const auto F = fit_current_status({{1.0, 1}, {1.0, 0}, {2.0, 1}});
  CHECK(F.size() == 2);
  CHECK(F(1.0) == 0.5);
  CHECK(F(2.0) == 1.0);
}

TEST_CASE("one-step estimator examples") {
  check_values(fit_ls_simple(single(1, 0)), 1, 1);
  check_values(fit_ls_simple(single(0, 0)), 0, 0);
  check_values(fit_ls_simple(single(0, 1)), 0, 1);
}

TEST_CASE("three-term estimator examples") {
  const FitResult a = fit_ls_full(single(0, 1));
  CHECK(a.converged);
  check_values(a.F, 0, 1);
  const FitResult b = fit_ls_full(single(1, 0));
  check_values(b.F, 1, 1);
  CHECK(b.objective == 0.0);
  CHECK(b.iterations <= IcmOptions{}.max_iter);

  const Sample2 all_left({{0.5, 1.0, 1, 0}, {0.2, 0.9, 1, 0}, {0.1, 0.3, 1, 0}});
  const FitResult c = fit_ls_full(all_left);
  CHECK(c.converged);
  CHECK(c.F.values() == VectorXd::Ones(all_left.grid_size()));
  // every residual vanishes at the perfect fit, so the multiplier is zero
  CHECK(c.lambda2 == doctest::Approx(0.0));
}

TEST_CASE("barrier examples") {
  const auto a = fit_ls_full_barrier(single(0, 1));
  CHECK(std::abs(a(1.0)) <= 1e-6);
  CHECK(std::abs(a(2.0) - 1.0) <= 1e-6);
  Rng rng = make_rng(31, 0);
  std::vector<Observation2> obs;
  for (int i = 0; i < 20; ++i) {
    const double u = uniform01(rng);
    obs.push_back({u, u + 0.5 + uniform01(rng), 0, 0});
  }
  const Sample2 right(obs);
  const auto b = fit_ls_full_barrier(right);
  CHECK(b.values().lpNorm<Eigen::Infinity>() <= 1e-6);
  CHECK_THROWS_AS(fit_ls_full_barrier(right, BarrierOptions{1.0, 2.0, 1e-10, 10}), Error);
}

TEST_CASE("barrier agrees with the convex minorant algorithm") {
  Rng rng = make_rng(32, 0);
  for (int rep = 0; rep < 5; ++rep) {
    const Sample2 s = gen_example1(50, Example1::TruncExp, rng);
    const FitResult icm = fit_ls_full(s);
    const auto bar = fit_ls_full_barrier(s);
    CHECK(test::sup_diff_on_grid(icm.F, bar, s.times()) <= 1e-6);
  }
}

TEST_CASE("likelihood estimator examples") {
  const FitResult a = fit_mle_ic2(single(0, 1));
  CHECK(a.converged);
  check_values(a.F, 0, 1);
  CHECK(loglik_ic2(a.F, single(0, 1)) == 0.0);

  Rng rng = make_rng(33, 0);
  const Sample2 s = gen_example1(200, Example1::TruncExp, rng);
  const FitResult mle = fit_mle_ic2(s);
  const FitResult ls = fit_ls_full(s);
  CHECK(mle.converged);
  CHECK(loglik_ic2(mle.F, s) >= loglik_ic2(ls.F, s));
  CHECK(mle.fenchel.pass);
}

TEST_CASE("likelihood estimator on current-status data equals the convex minorant") {
  Rng rng = make_rng(34, 0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<CurrentStatusObservation> cs;
    const int n = 1 + static_cast<int>(rng() % 60);
    for (int i = 0; i < n; ++i) {
      const double t = 0.01 + std::floor(uniform01(rng) * 30.0) / 30.0;
      cs.push_back({t, uniform01(rng) <= t ? 1 : 0});
    }
    const auto F = fit_current_status(cs);
    const Sample2 s = embed_current_status(cs);
    const FitResult mle = fit_mle_ic2(s);
    CHECK(mle.converged);
    double d = 0.0;
    for (const auto& o : cs) d = std::max(d, std::abs(F(o.t) - mle.F(o.t)));
    CHECK(d <= 1e-10);
  }
}

TEST_CASE("objective evaluators") {
  const StepDistribution zero(VectorXd::LinSpaced(2, 1.0, 2.0), VectorXd::Zero(2));
  const StepDistribution one(VectorXd::LinSpaced(2, 1.0, 2.0), VectorXd::Ones(2));
  VectorXd step(2);
  step << 0.0, 1.0;
  const StepDistribution perfect(VectorXd::LinSpaced(2, 1.0, 2.0), step);
  CHECK(criterion_ls_full(zero, single(1, 0)) == 2.0);
  CHECK(criterion_ls_full(perfect, single(0, 1)) == 0.0);
  CHECK(loglik_ic2(one, single(1, 0)) == 0.0);
  CHECK(criterion_ls_simple(zero, single(1, 0)) == 2.0);
  CHECK(loglik_ic2(zero, single(1, 0)) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("one-step estimator is weighted pava of the responses") {
  Rng rng = make_rng(35, 0);
  for (int rep = 0; rep < 30; ++rep) {
    const Sample2 s = test::random_sample(rng, 25, rep % 2 ? 0 : 8);
    // responses keyed by time; tied endpoints pool into one weighted mean
    std::map<double, std::pair<double, double>> pooled;
    for (const auto& o : s.observations()) {
      auto& a = pooled[o.u];
      a.first += o.d0;
      a.second += 1.0;
      auto& b = pooled[o.v];
      b.first += o.d0 + o.d1;
      b.second += 1.0;
    }
    VectorXd y(static_cast<Index>(pooled.size()));
    VectorXd w(y.size());
    Index i = 0;
    for (const auto& [t, acc] : pooled) {
      y[i] = acc.first / acc.second;
      w[i++] = acc.second;
    }
    const VectorXd fit = pava(y, w);
    const StepDistribution F = fit_ls_simple(s);
    i = 0;
    for (const auto& [t, acc] : pooled) CHECK(std::abs(F(t) - fit[i++]) <= 1e-12);
  }
}

TEST_CASE("three-term estimator matches grid search for n <= 3") {
  Rng rng = make_rng(36, 0);
  // n = 1 on the 1e-3 grid
  for (int d = 0; d < 3; ++d) {
    const Sample2 s = single(d == 0, d == 1);
    const VectorXd y = oracle::ls_full_by_grid(s, 1000);
    CHECK(sup_grid(fit_ls_full(s).F, y, s) <= 2e-3);
  }
  // n = 2 on the 1e-2 grid, with tolerance one grid step
  for (int rep = 0; rep < 4; ++rep) {
    const Sample2 s = test::random_sample(rng, 2);
    CHECK(sup_grid(fit_ls_full(s).F, oracle::ls_full_by_grid(s, 100), s) <= 1e-2);
  }
  // n <= 3 against the exact enumeration
  for (int rep = 0; rep < 60; ++rep) {
    const Sample2 s = test::random_sample(rng, 1 + rep % 3, rep % 4 == 0 ? 4 : 0);
    CHECK(sup_grid(fit_ls_full(s).F, oracle::ls_full_by_enumeration(s), s) <= 1e-9);
  }
}

TEST_CASE("no feasible descent from the three-term estimator") {
  Rng rng = make_rng(37, 0);
  const Sample2 s = gen_example1(100, Example1::Uniform, rng);
  const FitResult fit = fit_ls_full(s);
  const double base = criterion_ls_full(fit.F, s);
  const double eps = 1e-4;
  for (int j = 0; j < 100; ++j) {
    const VectorXd g = test::random_monotone(rng, s.grid_size());
    const VectorXd y = fit.F.values() + eps * (g - fit.F.values());
    const double moved = criterion_ls_full(StepDistribution::on_grid(s, y), s);
    CHECK(moved >= base - 1e-8 * eps);
  }
}

TEST_CASE("outputs are monotone and inside [0,1]") {
  Rng rng = make_rng(38, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const Sample2 s = test::random_sample(rng, 5 + rep * 3, rep % 3 ? 0 : 6);
    for (Estimator e : {Estimator::Mle, Estimator::LsFull, Estimator::LsSimple}) {
      const FitResult r = fit(e, s);
      CHECK(r.converged);
      const VectorXd& v = r.F.values();
      CHECK(v.minCoeff() >= 0.0);
      CHECK(v.maxCoeff() <= 1.0);
      for (Index k = 1; k < v.size(); ++k) CHECK(v[k] >= v[k - 1]);
    }
  }
}

TEST_CASE("estimator names and options") {
  CHECK(parse_estimator("ls-full") == Estimator::LsFull);
  CHECK(parse_estimator("ls_simple") == Estimator::LsSimple);
  CHECK(parse_estimator("mle") == Estimator::Mle);
  CHECK_THROWS_AS(parse_estimator("em"), Error);
  CHECK(to_string(Estimator::LsFull) == "ls_full");
  IcmOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(fit_ls_full(single(0, 1), bad), Error);
  bad = IcmOptions{};
  bad.max_iter = 0;
  CHECK_THROWS_AS(fit_mle_ic2(single(0, 1), bad), Error);
}

TEST_CASE("iteration cap returns a flagged iterate") {
  Rng rng = make_rng(39, 0);
  const Sample2 s = gen_example1(300, Example1::TruncExp, rng);
  IcmOptions opts;
  opts.max_iter = 1;
  opts.tol = 1e-15;
  const FitResult r = fit_mle_ic2(s, opts);
  CHECK(r.iterations == 1);
  CHECK_FALSE(r.converged);
}

TEST_CASE("embedding requires positive inspection times") {
  CHECK_THROWS_AS(embed_current_status({{0.0, 1}}), Error);
  const Sample2 s = embed_current_status({{1.0, 1}, {2.0, 0}});
  CHECK(s[0].v == 3.0);
  CHECK(s[1].u == 0.0);
}

TEST_CASE("likelihood fits that once stalled near the optimum converge") {
  // Each sample stalled at a non-optimal point: a bound run pulled back into
  // the interior, two free runs that needed merging, and a step whose decrease
  // was below the rounding noise of the objective.
  const ModelSpec m = model_preset("triangle-[0,1]");
  for (std::uint64_t stream : {852u, 1020u, 1737u}) {
    Rng rng = make_rng(20261019, stream);
    const Sample2 s = simulate(m, 1000, rng);
    const FitResult r = fit_mle_ic2(s);
    CHECK(r.converged);
    CHECK(verify_fenchel_mle(r.F, s, 1e-10).pass);
  }

  Rng rng = make_rng(20261019, 1);
  for (int rep = 0; rep <= 34; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 500);
    std::vector<CurrentStatusObservation> cs;
    for (int i = 0; i < n; ++i) {
      double t = 0.001 + uniform01(rng);
      if (rep % 2 == 0) t = 0.05 + std::floor(t * 20.0) / 20.0;
      const double x = -std::log1p(-uniform01(rng));
      cs.push_back({t, x <= t ? 1 : 0});
    }
    if (rep != 34) continue;
    const StepDistribution F = fit_current_status(cs);
    const FitResult r = fit_mle_ic2(embed_current_status(cs));
    CHECK(r.converged);
    double d = 0.0;
    for (const auto& o : cs) d = std::max(d, std::abs(F(o.t) - r.F(o.t)));
    CHECK(d <= 1e-12);
  }
}
