#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rdsim/exact.hpp"
#include "rdsim/fluctuations.hpp"

using namespace rdsim;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST_CASE("field value") {
  auto g = build_torus(1, 10);
  Configuration c(g);
  for (Site x = 0; x < 3; ++x) c.set(x, true);
  const double rho = 0.37;
  CHECK(field_value(c, TestFunction::constant(1.0), rho) == doctest::Approx((3 - rho * 10) / std::sqrt(10.0)));
  Configuration full(g);
  for (Site x = 0; x < 10; ++x) full.set(x, true);
  CHECK(std::abs(field_value(full, TestFunction::cosine_mode(2), rho)) < 1e-12);
  CHECK_THROWS_AS(field_value(Configuration(build_torus(2, 3)), TestFunction::constant(1), 0.5), std::invalid_argument);

  // exact variance by enumeration
  auto g8 = build_torus(1, 8);
  auto f = TestFunction::sine_mode(1);
  double m = 0, v = 0;
  for (std::uint64_t s = 0; s < 256; ++s) {
    auto cs = Configuration::from_index(g8, s);
    double w = bernoulli_weight(cs, rho), x = field_value(cs, f, rho);
    m += w * x;
    v += w * x * x;
  }
  CHECK(std::abs(m) < 1e-14);
  CHECK(v == doctest::Approx(field_variance_exact(f, 8, rho)).epsilon(1e-12));
}

TEST_CASE("decomposition without events") {
  auto g = build_torus(1, 16);
  auto p = ModelParams::stationary(1.0, g);
  Rng r(2, 0);
  auto c0 = sample_product_measure(g, p.rho, r);
  Trajectory tr{c0, {}, 0.3};
  auto f = TestFunction::cosine_mode(1);
  auto ft = martingale_decompose(tr, f, p, 0.1);
  Observable X = [&](const Configuration& c) { return field_value(c, f, p.rho); };
  const double LX = apply_generator(X, c0, p);
  REQUIRE(ft.times.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    // X is frozen, so the martingale exactly cancels the drift
    CHECK(ft.jumps[i] == 0.0);
    CHECK(ft.martingale[i] == doctest::Approx(-ft.times[i] * LX).epsilon(1e-12));
    CHECK(ft.drift[i] == doctest::Approx(ft.times[i] * LX).epsilon(1e-12));
  }
}

TEST_CASE("pathwise decomposition") {
  for (bool stat : {true, false}) {
    auto g = build_torus(1, 32);
    auto p = stat ? ModelParams::stationary(1.0, g) : ModelParams::with_density(2.0, g, 0.3);
    std::vector<TestFunction> fs{TestFunction::cosine_mode(1), TestFunction::sine_mode(2)};
    for (int rep = 0; rep < 30; ++rep) {
      Rng r(5, rep);
      auto c0 = sample_product_measure(g, 0.5, r);
      auto tr = simulate_ctmc(p, c0, 0.2, 8, rep);
      FieldObserver live(p, fs, c0, 0.2, 0.02);
      run_ctmc(p, c0, 0.2, Rng(8, rep), live);
      for (std::size_t j = 0; j < fs.size(); ++j) {
        auto ft = martingale_decompose(tr, fs[j], p, 0.02);
        CHECK(ft.max_residual < 1e-9);
        CHECK(ft.times.size() == 11);
        CHECK(live.result()[j].martingale.back() == ft.martingale.back());
        for (std::size_t i = 0; i < ft.times.size(); ++i) {
          CHECK(std::abs(ft.compensator[i] - ft.drift[i]) < 1e-9);
        }
        CHECK(ft.field.front() == doctest::Approx(field_value(c0, fs[j], p.rho)).epsilon(1e-12));
        CHECK(ft.field.back() == doctest::Approx(field_value(tr.final_configuration(), fs[j], p.rho)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("quadratic variation components") {
  auto g = build_torus(1, 32);
  auto p = ModelParams::stationary(1.0, g);
  Rng r(1, 1);
  auto c0 = sample_product_measure(g, p.rho, r);
  auto tr = simulate_ctmc(p, c0, 0.2, 3, 0);
  auto q = predictable_qv(tr, TestFunction::constant(2.0), p, 0.05);
  for (double v : q.exclusion) CHECK(v == 0.0);
  CHECK(q.reaction.back() > 0);
  for (std::size_t i = 0; i < q.times.size(); ++i) CHECK(q.total[i] == q.exclusion[i] + q.reaction[i]);

  // lambda = 0, rho = 1/2, mode 1: exclusion rate -> 2 rho(1-rho) 4 pi^2 = 2 pi^2
  auto g2 = build_torus(1, 256);
  auto p2 = ModelParams::stationary(0.0, g2);
  EnsembleSpec s{.params = p2, .functions = {TestFunction::cosine_mode(1)}};
  s.horizon = 0.02;
  s.sample_dt = 0.01;
  s.replicas = 4;
  auto ens = run_field_ensemble(s);
  auto rep = qv_report(ens, p2, TestFunction::cosine_mode(1));
  CHECK(rep.exclusion_continuum == doctest::Approx(2 * kPi * kPi));
  CHECK(rep.exclusion_relative_error() < 0.05);
  CHECK(rep.reaction_rate.mean == doctest::Approx(rep.reaction_product).epsilon(0.05));
}

TEST_CASE("martingale moments") {
  auto p = ModelParams::stationary(1.0, build_torus(1, 32));
  EnsembleSpec s{.params = p, .functions = {TestFunction::cosine_mode(1)}};
  s.horizon = 0.2;
  s.sample_dt = 0.05;
  s.replicas = 2000;
  s.seed = 77;
  auto ens = run_field_ensemble(s);
  auto r = martingale_report(ens);
  CHECK(r.max_residual < 1e-9);
  CHECK(std::abs(r.m_final.mean) < 4 * r.m_final.se);
  CHECK(std::abs(r.n_final.mean) < 4 * r.n_final.se);
  CHECK(std::abs(r.increment_slope) < 4 * r.increment_slope_se);
  CHECK(r.qv_final.mean > 0);

  // thread count does not change results
  s.replicas = 40;
  s.threads = 1;
  auto a = run_field_ensemble(s);
  s.threads = 3;
  auto b = run_field_ensemble(s);
  bool same = true;
  for (std::size_t i = 0; i < a.size(); ++i) same &= a[i][0].martingale == b[i][0].martingale;
  CHECK(same);
}

TEST_CASE("initial covariance") {
  const double rho = 0.3;
  auto c1 = TestFunction::cosine_mode(1), c2 = TestFunction::cosine_mode(2);
  auto r11 = initial_covariance_test(c1, c1, rho, 64, 20000, 3);
  auto r12 = initial_covariance_test(c1, c2, rho, 64, 20000, 4);
  CHECK(r11.exact == doctest::Approx(rho * (1 - rho)));
  CHECK(r11.continuum == doctest::Approx(rho * (1 - rho)));
  CHECK(std::abs(r11.z()) < 3);
  CHECK(std::abs(r12.exact) < 1e-14);
  CHECK(std::abs(r12.z()) < 3);
}

TEST_CASE("OU fit on an exact autoregression") {
  // AR(1) with the exact OU transition at spacing h
  const double theta = 50.0, h = 1e-3;
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z;
  const double a = std::exp(-theta * h), s = std::sqrt(1 - a * a);
  std::vector<std::vector<double>> series(400, std::vector<double>(200));
  for (auto& y : series) {
    y[0] = z(rng);
    for (std::size_t t = 1; t < y.size(); ++t) y[t] = a * y[t - 1] + s * z(rng);
  }
  // theta_guess = 4 pi^2 + c1 ~ 41.6 for these parameters
  auto p = ModelParams::stationary(1.0, build_torus(1, 16));
  auto fit = ou_fit(series, h, 1, p);
  CHECK(std::abs(fit.theta - theta) < 4 * fit.se);
  CHECK(fit.se < 0.1 * theta);
  std::vector<std::vector<double>> short_series(10, std::vector<double>(5, 1.0));
  CHECK_THROWS_AS(ou_fit(short_series, h, 1, p), std::domain_error);
}

TEST_CASE("OU drift candidates") {
  auto c = ou_drift_candidates(0.0, 0.5);
  CHECK(c[0] == doctest::Approx(2.0));
  CHECK(c[1] == doctest::Approx(1.0));
  CHECK(c[2] == doctest::Approx(2.0));
  const double r = stationary_density(1.0, 1);
  auto d = ou_drift_candidates(1.0, r);
  CHECK(d[0] == doctest::Approx(1 / (1 - r) - r * r / (1 + r * r)));
  CHECK(d[1] == doctest::Approx(2 - r));
  CHECK(d[2] == doctest::Approx(2 + r * r - 2 * r * (1 - r)));
}

TEST_CASE("OU drift grows with the mode") {
  auto p = ModelParams::stationary(1.0, build_torus(1, 64));
  OuExperiment ex{.params = p};
  ex.modes = {1, 2, 3};
  ex.replicas = 200;
  ex.horizon = 0.1;
  ex.burn_in = 0.02;
  auto fits = run_ou_experiment(ex);
  REQUIRE(fits.size() == 3);
  std::vector<double> k2, th;
  for (const auto& f : fits) {
    CHECK(f.theta > 0);
    k2.push_back(f.k * f.k);
    th.push_back(f.theta);
  }
  CHECK(th[0] < th[1]);
  CHECK(th[1] < th[2]);
  auto lf = linear_fit(k2, th);
  CHECK(lf.slope == doctest::Approx(4 * kPi * kPi).epsilon(0.15));
}

TEST_CASE("Boltzmann-Gibbs statistic") {
  CHECK_THROWS_AS(BgObserver(ModelParams::stationary(1, build_torus(1, 8)), TestFunction::constant(1),
                             OffsetSet(1, {{1}}), Configuration(build_torus(1, 8))),
                  std::invalid_argument);
  CHECK_THROWS_AS(BgObserver(ModelParams::stationary(1, build_torus(1, 8)), TestFunction::constant(1), OffsetSet(),
                             Configuration(build_torus(1, 8))),
                  std::invalid_argument);

  // incremental value against direct evaluation along a path
  auto g = build_torus(1, 24);
  auto p = ModelParams::stationary(1.0, g);
  OffsetSet a0(1, {{-1}, {-3}});
  Rng r(4, 4);
  auto c0 = sample_product_measure(g, p.rho, r);
  auto tr = simulate_ctmc(p, c0, 0.05, 9, 1);
  auto phi = TestFunction::sine_mode(1);
  double direct = 0, last = 0;
  Configuration c = c0;
  auto V = [&](const Configuration& cc) {
    double v = 0;
    for (Site x = 0; x < 24; ++x) v += phi(x / 24.0) * centered_monomial(cc, a0, x, p.rho) * (cc.value(x) - p.rho);
    return v;
  };
  for (const auto& e : tr.events) {
    direct += V(c) * (e.time - last);
    last = e.time;
    if (e.kind == EventKind::Exchange)
      c.swap(e.site, e.other);
    else
      c.flip(e.site);
  }
  direct += V(c) * (0.05 - last);
  direct /= std::sqrt(24.0);
  CHECK(bg_statistic(tr, phi, a0, p.rho) == doctest::Approx(direct).epsilon(1e-10));

  BgExperiment ex;
  ex.lambda = 0.0;
  ex.ns = {16, 32, 64};
  ex.a0 = OffsetSet(1, {{-1}});
  ex.phi = TestFunction::constant(1.0);
  ex.horizon = 0.05;
  ex.replicas = 400;
  auto rep = run_bg_experiment(ex);
  for (const auto& pt : rep.points) CHECK(std::abs(pt.mean.mean) < 4 * pt.mean.se);
  CHECK(rep.strictly_decreasing);
  CHECK(rep.loglog.slope < 0);
}

TEST_CASE("time-averaged local functions") {
  auto p = ModelParams::stationary(1.0, build_torus(1, 16));
  CHECK(local_function_mean(LocalFunction::CenteredRate, p) == doctest::Approx(2 * p.rho));
  CHECK(local_function_mean(LocalFunction::GradientSquared, p) == doctest::Approx(2 * p.rho * (1 - p.rho)));

  TimeAverageExperiment zero;
  zero.psi = LocalFunction::Zero;
  zero.ns = {16, 32};
  zero.replicas = 5;
  for (const auto& pt : time_average_local_check(zero).points) CHECK(pt.abs_value.mean == 0.0);

  TimeAverageExperiment ex;
  ex.replicas = 100;
  auto rep = time_average_local_check(ex);
  CHECK(rep.centering == doctest::Approx(2 * stationary_density(1.0, 1)));
  CHECK(rep.loglog.slope < -0.4);
  CHECK(rep.loglog.slope == doctest::Approx(-0.5).epsilon(0.2));
}
