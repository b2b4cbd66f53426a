#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "rdsim/lattice.hpp"

using namespace rdsim;

namespace {

Configuration from_string(const TorusGeometry& g, const char* bits) {
  Configuration c(g);
  for (Site x = 0; bits[x]; ++x) c.set(x, bits[x] == '1');
  return c;
}

Configuration random_config(const TorusGeometry& g, std::mt19937_64& rng, double p = 0.5) {
  std::bernoulli_distribution b(p);
  Configuration c(g);
  for (Site x = 0; x < g.site_count(); ++x) c.set(x, b(rng));
  return c;
}

}  // namespace

TEST_CASE("torus construction") {
  CHECK_THROWS_AS(build_torus(0, 4), std::invalid_argument);
  CHECK_THROWS_AS(build_torus(1, 1), std::invalid_argument);

  auto g = build_torus(1, 4);
  CHECK(g.site_count() == 4);
  for (Site x = 0; x < 4; ++x) {
    std::multiset<Site> nb(g.neighbors(x).begin(), g.neighbors(x).end());
    CHECK(nb == std::multiset<Site>{(x + 1) % 4, (x + 3) % 4});
  }

  auto g2 = build_torus(2, 3);
  CHECK(g2.site_count() == 9);
  for (Site x = 0; x < 9; ++x) CHECK(g2.neighbors(x).size() == 4);
  // row-major: last coordinate fastest
  CHECK(g2.coords(5) == std::vector<int>{1, 2});
  CHECK(g2.neighbor(5, 1, +1) == 3);
  CHECK(g2.neighbor(5, 0, -1) == 2);
}

TEST_CASE("d=3 n=2 neighbors coincide in both directions") {
  auto g = build_torus(3, 2);
  CHECK(g.site_count() == 8);
  for (Site x = 0; x < 8; ++x) {
    auto c = g.coords(x);
    for (int j = 0; j < 3; ++j) {
      auto up = c, down = c;
      up[j] = (c[j] + 1) % 2;
      down[j] = (c[j] + 1) % 2;
      CHECK(g.neighbor(x, j, +1) == g.site_at(up));
      CHECK(g.neighbor(x, j, -1) == g.site_at(down));
      CHECK(g.neighbor(x, j, +1) == g.neighbor(x, j, -1));
    }
  }
}

TEST_CASE("neighbor table matches coordinate arithmetic") {
  for (int d = 1; d <= 3; ++d)
    for (int n = 2; n <= 5; ++n) {
      auto g = build_torus(d, n);
      for (Site x = 0; x < g.site_count(); ++x) {
        auto c = g.coords(x);
        CHECK(g.site_at(c) == x);
        for (int j = 0; j < d; ++j) {
          auto up = c;
          up[j] += 1;
          auto down = c;
          down[j] -= 1;
          CHECK(g.neighbor(x, j, +1) == g.site_at(up));
          CHECK(g.neighbor(x, j, -1) == g.site_at(down));
        }
      }
    }
}

TEST_CASE("swap and flip") {
  auto g = build_torus(1, 4);
  auto c = from_string(g, "1010");
  CHECK(swap_sites(c, 0, 1) == from_string(g, "0110"));
  CHECK(swap_sites(c, 2, 2) == c);
  CHECK(flip_site(from_string(g, "0000"), 2) == from_string(g, "0010"));

  std::mt19937_64 rng(7);
  auto g2 = build_torus(2, 5);
  for (int i = 0; i < 100; ++i) {
    auto a = random_config(g2, rng);
    Site x = rng() % 25, y = rng() % 25;
    auto s = swap_sites(a, x, y);
    CHECK(swap_sites(s, x, y) == a);
    CHECK(s.particle_count() == a.particle_count());
    auto f = flip_site(a, x);
    CHECK(flip_site(f, x) == a);
    long diff = static_cast<long>(f.particle_count()) - static_cast<long>(a.particle_count());
    CHECK(std::abs(diff) == 1);
  }
}

TEST_CASE("state index round trip and hash") {
  auto g = build_torus(1, 6);
  std::set<std::size_t> hashes;
  for (std::uint64_t s = 0; s < 64; ++s) {
    auto c = Configuration::from_index(g, s);
    CHECK(c.index() == s);
    hashes.insert(c.hash());
  }
  CHECK(hashes.size() == 64);
  CHECK_THROWS_AS(Configuration::from_index(g, 64), std::invalid_argument);
}

TEST_CASE("centered monomials") {
  auto g = build_torus(1, 6);
  auto c = from_string(g, "100000");
  CHECK(centered_monomial(c, OffsetSet{}, 0, 0.3) == 1.0);
  CHECK(centered_monomial(c, OffsetSet(1, {{0}}), 0, 0.5) == doctest::Approx(0.5));
  CHECK_THROWS_AS(centered_monomial(c, OffsetSet(1, {{0}}), 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(OffsetSet(1, {{0}, {0}}), std::invalid_argument);
  CHECK(OffsetSet(1, {{-1}, {-2}}).strictly_negative());
  CHECK_FALSE(OffsetSet(1, {{-1}, {0}}).strictly_negative());

  // exact expectation over nu_rho of two-offset monomials, and
  // decorrelation of disjoint translates
  const double rho = 0.37;
  OffsetSet a(1, {{-1}, {0}});
  double mean = 0, cross = 0, disjoint_cross = 0;
  for (std::uint64_t s = 0; s < 64; ++s) {
    auto cfg = Configuration::from_index(g, s);
    double w = 1;
    for (Site x = 0; x < 6; ++x) w *= cfg.occupied(x) ? rho : 1 - rho;
    double m0 = centered_monomial(cfg, a, 1, rho);
    double m3 = centered_monomial(cfg, a, 4, rho);
    double m1 = centered_monomial(cfg, a, 2, rho);
    mean += w * m0;
    disjoint_cross += w * m0 * m3;
    cross += w * m0 * m1;
  }
  CHECK(std::abs(mean) < 1e-15);
  CHECK(std::abs(disjoint_cross) < 1e-15);
  CHECK(std::abs(cross) < 1e-15);  // overlapping by one site still has a free centered factor
}

TEST_CASE("Bernoulli weight is invariant under swaps") {
  for (auto [d, n] : {std::pair{1, 8}, std::pair{1, 16}, std::pair{2, 4}, std::pair{2, 3}}) {
    auto g = build_torus(d, n);
    const double rho = 0.23;
    std::size_t states = std::size_t{1} << g.site_count();
    for (std::size_t s = 0; s < states; s += (states > 4096 ? 97 : 1)) {
      auto c = Configuration::from_index(g, s);
      long double oracle = 1;
      for (Site x = 0; x < g.site_count(); ++x) oracle *= c.occupied(x) ? rho : 1 - rho;
      CHECK(std::abs(bernoulli_weight(c, rho) - static_cast<double>(oracle)) <= 1e-15 * static_cast<double>(oracle));
      for (Site x = 0; x < g.site_count(); ++x)
        for (Site y = 0; y < g.site_count(); ++y) CHECK(bernoulli_weight(swap_sites(c, x, y), rho) == bernoulli_weight(c, rho));
    }
  }
}

TEST_CASE("sparse partition examples") {
  auto g = build_torus(1, 5);
  auto p = sparse_partition(g, 2);
  REQUIRE(p.classes.size() == 3);
  CHECK(p.classes[0] == std::vector<Site>{0, 2});
  CHECK(p.classes[1] == std::vector<Site>{1, 3});
  CHECK(p.classes[2] == std::vector<Site>{4});

  auto one = sparse_partition(build_torus(1, 7), 1);
  REQUIRE(one.classes.size() == 1);
  CHECK(one.classes[0].size() == 7);

  auto g2 = build_torus(2, 4);
  auto p2 = sparse_partition(g2, 2);
  CHECK(p2.classes.size() <= 9);
  for (const auto& cls : p2.classes)
    for (Site x : cls)
      for (Site y : cls)
        if (x != y) CHECK(g2.distance(x, y) >= 2);

  CHECK_THROWS_AS(sparse_partition(g, 6), std::invalid_argument);
  CHECK_THROWS_AS(sparse_partition(g, 0), std::invalid_argument);
}

TEST_CASE("sparse partition audit, small exhaustive sweep") {
  for (int d = 1; d <= 2; ++d)
    for (int n = 2; n <= 9; ++n)
      for (int k = 1; k <= n; ++k) {
        auto g = build_torus(d, n);
        auto audit = audit_partition(g, sparse_partition(g, k));
        CHECK(audit.ok());
      }
  // the audit must notice a bad partition
  auto g = build_torus(1, 6);
  SparsePartition bad{2, {{0, 1}, {2, 3, 4, 5}}};
  CHECK_FALSE(audit_partition(g, bad).sparse);
  SparsePartition gap{1, {{0, 1, 2}}};
  CHECK_FALSE(audit_partition(g, gap).covers);
}
