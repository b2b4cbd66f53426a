#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rdsim/concentration.hpp"

using namespace rdsim;

TEST_CASE("discrete variables") {
  auto b = centered_bernoulli(0.3);
  CHECK_NOTHROW(b.validate());
  CHECK(std::abs(b.mean()) < 1e-15);
  CHECK(b.log_mgf(0.0) == doctest::Approx(0.0));
  CHECK(std::exp(b.log_mgf(2.0)) == doctest::Approx(0.7 * std::exp(-0.6) + 0.3 * std::exp(1.4)).epsilon(1e-14));
  // huge theta stays finite
  CHECK(std::isfinite(b.log_mgf(5000.0)));
  CHECK(b.log_mgf(5000.0) == doctest::Approx(std::log(0.3) + 5000 * 0.7).epsilon(1e-14));

  auto s = scaled_bernoulli_sum(5, 0.4);
  CHECK(s.values.size() == 6);
  CHECK(std::abs(s.mean()) < 1e-14);
  CHECK(s.expect([](double x) { return x * x; }) == doctest::Approx(0.24).epsilon(1e-13));
  CHECK(s.probs[5] == doctest::Approx(std::pow(0.4, 5)));

  auto t = centered_two_point(-1.0, 3.0);
  CHECK(std::abs(t.mean()) < 1e-15);
  CHECK_THROWS_AS(centered_two_point(1.0, 3.0), std::invalid_argument);
  CHECK_THROWS_AS((DiscreteVariable{{0, 1}, {0.5, 0.6}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((DiscreteVariable{{0, 1}, {1.0}}.validate()), std::invalid_argument);
}

TEST_CASE("subgaussian Bernoulli") {
  for (int i = 1; i <= 9; ++i) {
    const double rho = 0.1 * i;
    auto r = subgaussian_verify({centered_bernoulli(rho), 0.25, 400});
    CHECK(r.passed());
    CHECK(r.grid_size == 801);
    CHECK(r.tail_checks >= 1);
    // grid minimum never exceeds the exact optimum and resolves it to 1e-4
    const double opt = bernoulli_optimal_sigma2(rho);
    CHECK(r.minimal_sigma2 <= opt * (1 + 1e-12));
    CHECK(r.minimal_sigma2 >= opt * (1 - 1e-4));
    CHECK(r.sharp);
    // below the optimum the check must fail
    auto below = subgaussian_verify({centered_bernoulli(rho), 0.98 * opt, 400});
    CHECK_FALSE(below.passed());
    CHECK(below.mgf_violations > 0);
  }
  CHECK(bernoulli_optimal_sigma2(0.2) == doctest::Approx(bernoulli_optimal_sigma2(0.8)));
  CHECK(bernoulli_optimal_sigma2(0.4999999) == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("subgaussian degenerate and errors") {
  for (double s2 : {1e-6, 1.0, 100.0}) {
    auto r = subgaussian_verify({{{0.0}, {1.0}}, s2, 50});
    CHECK(r.passed());
    CHECK(r.minimal_sigma2 == 0.0);
    CHECK(r.tail_checks == 0);
  }
  CHECK_THROWS_AS(subgaussian_verify({{{0.0, 1.0}, {0.5, 0.5}}, 0.25, 50}), std::invalid_argument);
  CHECK_THROWS_AS(subgaussian_verify({centered_bernoulli(0.5), 0.0, 50}), std::invalid_argument);
}

TEST_CASE("Hoeffding parameter dominates the minimal one") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = -u(gen), b = u(gen);
    const double h = (b - a) * (b - a) / 4.0;
    auto r = subgaussian_verify({centered_two_point(a, b), h, 60});
    REQUIRE(r.passed());
    CHECK(r.minimal_sigma2 <= h * (1 + 1e-12));
  }
}

TEST_CASE("tail bound is exact on the support") {
  // X uniform on {-2, 2}: P(|X| >= 2) = 1, bound 2 e^{-2/sigma2} fails for sigma2 < 2 / log 2
  DiscreteVariable v{{-2.0, 2.0}, {0.5, 0.5}};
  auto r = subgaussian_verify({v, 4.0, 100});
  CHECK(r.passed());
  CHECK(r.tail_worst_margin == doctest::Approx(2 * std::exp(-0.5) - 1.0));
  CHECK(r.minimal_sigma2 <= 4.0 * (1 + 1e-12));
  CHECK(r.minimal_sigma2 >= 4.0 * (1 - 1e-4));
}

TEST_CASE("chi-square moment") {
  SubgaussianWitness w{centered_bernoulli(0.5), 0.25, 400};
  auto r = chisq_moment_verify(w, 1.0);
  CHECK(r.passed());
  CHECK(r.lhs == doctest::Approx(std::exp(0.25)).epsilon(1e-15));
  CHECK(r.rhs == doctest::Approx(std::exp(2.0)).epsilon(1e-15));

  auto small = chisq_moment_verify(w, 1e-10);
  CHECK(std::abs(small.lhs - 1.0) < 1e-9);
  CHECK(std::abs(small.rhs - 1.0) < 1e-9);
  CHECK(small.passed());

  CHECK_THROWS_AS(chisq_moment_verify(w, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(chisq_moment_verify(w, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(chisq_moment_verify(w, 1.01), std::invalid_argument);

  for (int m = 1; m <= 12; ++m) {
    for (double rho : {0.1, 0.5, 0.8}) {
      auto s = chisq_moment_verify({scaled_bernoulli_sum(m, rho), 0.25, 200}, 1.0);
      CHECK(s.subgaussian);
      CHECK(s.passed());
    }
  }
  // an invalid claimed parameter is flagged even when the moment holds
  auto bad = chisq_moment_verify({centered_two_point(-3.0, 3.0), 0.5, 100}, 0.5);
  CHECK_FALSE(bad.subgaussian);
  CHECK_FALSE(bad.passed());
}

TEST_CASE("bounded differences: particle count") {
  const TorusGeometry g(1, 8);
  auto count = [](const Configuration& c) { return static_cast<double>(c.particle_count()); };
  for (double rho : {0.2, 0.5, 0.9}) {
    auto r = bounded_differences_verify(count, g, rho, {0.25, 1.5, 3.0});
    CHECK(r.passed());
    for (double c : r.oscillation) CHECK(c == 1.0);
    CHECK(r.oscillation_sq_sum == 8.0);
    CHECK(r.mean == doctest::Approx(8 * rho).epsilon(1e-13));
    // attained deviations j - 8 rho > 0 plus the extra deltas
    int attained = 0;
    for (int j = 0; j <= 8; ++j) attained += j - 8 * rho > 1e-12;
    CHECK(r.checks == static_cast<std::size_t>(attained + 3));
    // binomial oracle at the worst point
    const double delta = r.worst_delta;
    double tail = 0;
    for (int j = 0; j <= 8; ++j) {
      if (j - 8 * rho >= delta - 1e-12)
        tail += std::tgamma(9.0) / (std::tgamma(j + 1.0) * std::tgamma(9.0 - j)) * std::pow(rho, j) *
                std::pow(1 - rho, 8 - j);
    }
    if (delta > 0.25 + 1e-9 && std::abs(delta - 1.5) > 1e-9 && std::abs(delta - 3.0) > 1e-9)
      CHECK(r.worst_margin == doctest::Approx(std::exp(-2 * delta * delta / 8.0) - tail).epsilon(1e-12));
  }
}

TEST_CASE("bounded differences: constant and errors") {
  const TorusGeometry g(1, 6);
  auto r = bounded_differences_verify([](const Configuration&) { return 3.7; }, g, 0.41, {0.1, 1.0});
  CHECK(r.passed());
  CHECK(r.oscillation_sq_sum == 0.0);
  CHECK(r.checks == 2);
  CHECK(r.worst_margin == 0.0);
  CHECK_THROWS_AS(bounded_differences_verify([](const Configuration&) { return 0.0; }, TorusGeometry(1, 17), 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(bounded_differences_verify([](const Configuration&) { return 0.0; }, g, 0.5, {-1.0}),
                  std::invalid_argument);
}

TEST_CASE("bounded differences: generator of the field") {
  const auto p = ModelParams::stationary(1.0, TorusGeometry(1, 8));
  const auto f = TestFunction::cosine_mode(1);
  auto d = dynkin_bounded_differences(f, p);
  CHECK(d.report.passed());
  CHECK(d.claimed == doctest::Approx(3 * std::sqrt(2.0) / std::sqrt(8.0)));
  // the exact oscillation is driven by the discrete Laplacian and exceeds the claimed constant
  CHECK(d.exact > d.claimed);
  CHECK_FALSE(d.claim_holds());
  // same oscillation from the Dynkin expansion
  const auto dyn = dynkin_expansion(f, p);
  auto r = bounded_differences_verify([&](const Configuration& c) { return dyn.evaluate(c); }, p.geometry, p.rho);
  CHECK(r.max_oscillation() == doctest::Approx(d.exact).epsilon(1e-10));
  CHECK(r.mean == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("tail to moment") {
  CHECK(tail_moment_constant(1.0) == doctest::Approx(2.0));
  for (double t = 0.05; t < 1.95; t += 0.05) CHECK(tail_moment_constant(t) < tail_moment_constant(t + 0.05));
  CHECK(tail_moment_constant(1.9999) > 1e4);
  CHECK_THROWS_AS(tail_moment_constant(0.0), std::invalid_argument);
  CHECK_THROWS_AS(tail_moment_constant(2.0), std::invalid_argument);
  CHECK_THROWS_AS(tail_to_moment_verify(TailWitness::uniform(1.0), 1.0, 2.5), std::invalid_argument);

  const auto u = TailWitness::uniform(1.0);
  CHECK(u.tail_sup() == doctest::Approx(4.0 / 27.0));
  double grid_sup = 0;
  for (int i = 1; i < 10000; ++i) {
    const double d = i / 10000.0;
    grid_sup = std::max(grid_sup, d * d * (1 - d));
  }
  CHECK(grid_sup <= u.tail_sup());
  CHECK(grid_sup == doctest::Approx(u.tail_sup()).epsilon(1e-6));
  for (double t : {0.1, 0.5, 1.0, 1.5, 1.9}) {
    auto r = tail_to_moment_verify(u, 1.0, t);
    CHECK(r.hypothesis_holds());
    CHECK(r.lhs == doctest::Approx(1.0 / (1.0 + t)));
    CHECK(r.passed());
  }
  auto zero = tail_to_moment_verify(TailWitness::discrete({{0.0}, {1.0}}), 0.0, 1.3);
  CHECK(zero.lhs == 0.0);
  CHECK(zero.passed());

  // discrete: sup of delta^2 P(|X| > delta) against a fine delta grid
  const auto w = TailWitness::discrete(scaled_bernoulli_sum(6, 0.3));
  double sup = 0;
  for (int i = 1; i < 40000; ++i) {
    const double d = i / 10000.0;
    double p = 0;
    for (std::size_t j = 0; j < w.variable.values.size(); ++j)
      if (std::abs(w.variable.values[j]) > d) p += w.variable.probs[j];
    sup = std::max(sup, d * d * p);
  }
  CHECK(sup <= w.tail_sup() * (1 + 1e-12));
  CHECK(sup == doctest::Approx(w.tail_sup()).epsilon(1e-3));
  // a tail constant below the supremum violates the hypothesis
  CHECK_FALSE(tail_to_moment_verify(w, 0.5 * w.tail_sup(), 1.0).hypothesis_holds());
}

TEST_CASE("grouped Hoelder bound") {
  // window 1: xi_x independent, closed form for the direct side
  const double rho = 0.3, gamma = 0.7;
  auto r = holder_grouping_verify({1, 10, 1, 3, rho, gamma, 0});
  const double per_site = std::log((1 - rho) * std::exp(gamma * rho * rho) + rho * std::exp(gamma * (1 - rho) * (1 - rho)));
  CHECK(r.direct == doctest::Approx(10 * per_site / gamma).epsilon(1e-13));
  CHECK(r.passed());
  CHECK(r.independent_classes);
  CHECK(r.grouped >= r.direct);

  for (int dim : {1, 2}) {
    const int n = dim == 1 ? 12 : 4;
    for (int w = 1; w <= 3; ++w) {
      for (int k = 1; k <= n; ++k) {
        auto h = holder_grouping_verify({dim, n, w, k, 0.57, 0.5, 0});
        CHECK(h.passed());
        CHECK(h.direct <= h.grouped + 1e-12);
        if (k >= w) CHECK(h.factorization_error < 1e-10);
        if (k == 1) CHECK(h.grouped == doctest::Approx(h.direct).epsilon(1e-13));
      }
    }
  }
  // a larger exponent only loosens the bound
  auto a = holder_grouping_verify({1, 8, 2, 2, 0.5, 1.0, 0});
  auto b = holder_grouping_verify({1, 8, 2, 2, 0.5, 1.0, 9.0});
  CHECK(b.grouped >= a.grouped);
  CHECK_THROWS_AS(holder_grouping_verify({1, 8, 2, 3, 0.5, 1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(holder_grouping_verify({2, 5, 1, 2, 0.5, 1.0, 0}), std::invalid_argument);
}

TEST_CASE("replacement constant") {
  const double rho = stationary_density(1.0, 1);
  auto sweep = replacement_constant_sweep({6, 10, 14}, {1, 2, 3}, rho);
  REQUIRE(sweep.size() == 9);
  for (const auto& pt : sweep) CHECK(pt.constant > 0);
  // uniform in n at fixed l
  for (int ell : {1, 2, 3}) {
    const double a = replacement_constant(6, ell, rho), b = replacement_constant(14, ell, rho);
    CHECK(b <= a);
    CHECK(b > 0.9 * a);
  }
  CHECK_THROWS_AS(replacement_constant(8, 8, rho), std::invalid_argument);
  CHECK_THROWS_AS(replacement_constant(20, 2, rho), std::invalid_argument);
}

TEST_CASE("concentration suites") {
  for (const auto& name : concentration_suites()) {
    if (name == "holder") continue;  // covered by the acceptance run
    auto r = run_concentration_suite(name, 1);
    CHECK_MESSAGE(r.passed(), name);
    CHECK(r.violations() == 0);
  }
  CHECK_THROWS_AS(run_concentration_suite("nope"), std::invalid_argument);
}
