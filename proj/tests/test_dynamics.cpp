#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rdsim/dynamics.hpp"

using namespace rdsim;

namespace {

Configuration random_config(const TorusGeometry& g, std::mt19937_64& rng, double p = 0.5) {
  std::bernoulli_distribution b(p);
  Configuration c(g);
  for (Site x = 0; x < g.site_count(); ++x) c.set(x, b(rng));
  return c;
}

// Grid bracket of the sign change of (1-m)(1 + lambda d m^2) - m, then Newton.
double newton_root(double lambda, int d) {
  auto F = [&](double m) { return (1 - m) * (1 + lambda * d * m * m) - m; };
  double m = 0.5;
  for (int i = 0; i < 10000; ++i)
    if (F(i / 10000.0) > 0 && F((i + 1) / 10000.0) <= 0) m = (i + 0.5) / 10000.0;
  for (int i = 0; i < 50; ++i) {
    double f = (1 - m) * (1 + lambda * d * m * m) - m;
    double df = -(1 + lambda * d * m * m) + (1 - m) * 2 * lambda * d * m - 1;
    m -= f / df;
  }
  return m;
}

}  // namespace

TEST_CASE("reaction rates") {
  auto g = build_torus(1, 5);
  auto p = ModelParams::with_density(2.0, g, 0.3);
  Configuration c(g);
  // 1 0 1 0 0
  c.set(0, true);
  c.set(2, true);
  CHECK(reaction_rate(c, 0, p) == 1.0);
  CHECK(reaction_rate(c, 1, p) == 3.0);
  CHECK(reaction_rate(c, 3, p) == 1.0);
  CHECK(reaction_rate(c, 4, p) == 1.0);
  auto occ = c.to_vector();
  for (Site x = 0; x < 5; ++x) CHECK(reaction_rate(occ.data(), g, x, 2.0) == reaction_rate(c, x, p));

  auto g2 = build_torus(2, 3);
  auto p2 = ModelParams::with_density(0.5, g2, 0.4);
  Configuration c2(g2);
  auto at = [&](int a, int b) {
    std::vector<int> v{a, b};
    return g2.site_at(v);
  };
  for (Site x : {at(0, 1), at(2, 1), at(1, 0), at(1, 2)}) c2.set(x, true);
  CHECK(reaction_rate(c2, at(1, 1), p2) == doctest::Approx(2.0));
}

TEST_CASE("stationary density") {
  CHECK(stationary_density(0.0, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(stationary_density(1.0, 1) == doctest::Approx(0.5698402909980533).epsilon(1e-13));
  for (int d = 1; d <= 3; ++d)
    for (double lam : {0.0, 0.3, 1.0, 2.0, 5.0, 20.0}) {
      double r = stationary_density(lam, d);
      CHECK(r > 0);
      CHECK(r < 1);
      CHECK(std::abs(forcing(r, lam, d)) < 1e-13);
      CHECK(r == doctest::Approx(newton_root(lam, d)).epsilon(1e-12));
      // single sign change on a grid
      int changes = 0;
      double prev = forcing(0.0, lam, d);
      for (int i = 1; i <= 1000; ++i) {
        double v = forcing(i / 1000.0, lam, d);
        if ((v > 0) != (prev > 0)) ++changes;
        prev = v;
      }
      CHECK(changes == 1);
    }
  CHECK_THROWS_AS(stationary_density(-1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams::with_density(1.0, build_torus(1, 4), 0.0), std::invalid_argument);
  auto p = ModelParams::stationary(1.0, build_torus(1, 4));
  CHECK(p.rho == doctest::Approx(0.5698402909980533));
}

TEST_CASE("generator on a small observable") {
  // n = 3: f = eta_0.  L f = n^2 [(eta_1 - eta_0) + (eta_2 - eta_0)] + c_0 (1 - 2 eta_0)
  auto g = build_torus(1, 3);
  auto p = ModelParams::with_density(1.5, g, 0.5);
  Observable f = [](const Configuration& c) { return static_cast<double>(c.value(0)); };
  for (std::uint64_t s = 0; s < 8; ++s) {
    auto c = Configuration::from_index(g, s);
    double e0 = c.value(0), e1 = c.value(1), e2 = c.value(2);
    double c0 = e0 ? 1.0 : 1.0 + 1.5 * e1 * e2;
    CHECK(apply_generator(f, c, p) == doctest::Approx(9 * (e1 + e2 - 2 * e0) + c0 * (1 - 2 * e0)));
  }
}

TEST_CASE("test functions") {
  auto c = TestFunction::cosine_mode(2);
  CHECK(c(0.0) == doctest::Approx(std::numbers::sqrt2));
  CHECK(c.gradient_norm_sq() == doctest::Approx(16 * std::numbers::pi * std::numbers::pi));
  CHECK(c.derivative_mismatch() < 1e-6);
  CHECK(TestFunction::sine_mode(1).derivative_mismatch() < 1e-6);
  CHECK_THROWS_AS(TestFunction::cosine_mode(0), std::invalid_argument);
  // discrete orthonormality
  auto v = c.sample(64);
  double s = 0;
  for (double a : v) s += a * a;
  CHECK(s / 64 == doctest::Approx(1.0));

  const int m = 64;
  std::vector<double> f(m), df(m), d2f(m);
  for (int i = 0; i < m; ++i) {
    double u = static_cast<double>(i) / m, w = 2 * std::numbers::pi;
    f[i] = std::sin(w * u) + 0.5 * std::cos(2 * w * u);
    df[i] = w * std::cos(w * u) - w * std::sin(2 * w * u);
    d2f[i] = -w * w * std::sin(w * u) - 2 * w * w * std::cos(2 * w * u);
  }
  auto t = TestFunction::tabulated(f, df, d2f);
  CHECK(t(0.3) == doctest::Approx(std::sin(0.6 * std::numbers::pi) + 0.5 * std::cos(1.2 * std::numbers::pi)).epsilon(1e-5));
  CHECK(t.l2_norm_sq() == doctest::Approx(0.625).epsilon(1e-4));
}

TEST_CASE("Dynkin expansion equals the generator applied to the field") {
  std::mt19937_64 rng(11);
  for (double lam : {0.0, 1.0, 3.0}) {
    for (bool stat : {true, false}) {
      auto g = build_torus(1, 32);
      auto p = stat ? ModelParams::stationary(lam, g) : ModelParams::with_density(lam, g, 0.37);
      for (auto f : {TestFunction::cosine_mode(1), TestFunction::sine_mode(3)}) {
        auto e = dynkin_expansion(f, p);
        Observable X = [&](const Configuration& c) { return field_value(c, f, p.rho); };
        double worst = 0;
        for (int i = 0; i < 1000; ++i) {
          auto c = random_config(g, rng, 0.2 + 0.6 * (i % 7) / 6.0);
          double a = apply_generator(X, c, p), b = e.evaluate(c);
          worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
        }
        CHECK(worst < 1e-10);
        if (stat)
          for (double v : e.constant) CHECK(std::abs(v) < 1e-12);
      }
    }
  }
  CHECK_THROWS_AS(dynkin_expansion(TestFunction::cosine_mode(1), ModelParams::stationary(1, build_torus(2, 4))),
                  std::invalid_argument);
}

TEST_CASE("Dynkin coefficients") {
  auto g = build_torus(1, 16);
  auto p = ModelParams::stationary(1.0, g);
  auto f = TestFunction::cosine_mode(1);
  auto e = dynkin_expansion(f, p);
  auto fx = f.sample(16);
  const double r = p.rho;
  for (int x = 0; x < 16; ++x) {
    int xm = (x + 15) % 16, xp = (x + 1) % 16;
    CHECK(e.pair_adjacent[x] == doctest::Approx(-r * (fx[xm] + fx[x])));
    CHECK(e.pair_gap[x] == doctest::Approx((1 - r) * fx[xm]));
    CHECK(e.triple[x] == doctest::Approx(-fx[xm]));
    CHECK(e.laplacian[x] == doctest::Approx(256 * (fx[xp] + fx[xm] - 2 * fx[x])));
  }
}
