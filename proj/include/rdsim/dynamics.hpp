#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rdsim/lattice.hpp"
#include "rdsim/test_function.hpp"

namespace rdsim {

struct ModelParams {
  double lambda = 0;
  TorusGeometry geometry;
  double rho = 0.5;
  bool stationary_reference = false;

  // rho set to the root of the forcing term.
  static ModelParams stationary(double lambda, const TorusGeometry& g);
  static ModelParams with_density(double lambda, const TorusGeometry& g, double rho);

  void validate() const;
  [[nodiscard]] double exchange_rate() const noexcept {
    return static_cast<double>(geometry.side()) * geometry.side();
  }
};

// c_x: 1 on occupied sites, 1 + lambda sum_j eta_{x-e_j} eta_{x+e_j} on empty ones.
[[nodiscard]] double reaction_rate(const Configuration& c, Site x, const ModelParams& p);

// Same rate evaluated on a raw occupancy array.
[[nodiscard]] inline double reaction_rate(const std::uint8_t* occ, const TorusGeometry& g, Site x, double lambda) {
  if (occ[x]) return 1.0;
  int m = 0;
  auto nb = g.neighbors(x);
  for (int j = 0; j < g.dim(); ++j) m += occ[nb[2 * j]] & occ[nb[2 * j + 1]];
  return 1.0 + lambda * m;
}

// F(m) = (1-m)(1 + lambda d m^2) - m
[[nodiscard]] double forcing(double m, double lambda, int dim);
[[nodiscard]] double stationary_density(double lambda, int dim);

using Observable = std::function<double(const Configuration&)>;

// n^2 sum_{x,j} [f(eta^{x,x+e_j}) - f(eta)] + sum_x c_x(eta) [f(eta^x) - f(eta)]
[[nodiscard]] double apply_generator(const Observable& fn, const Configuration& c, const ModelParams& p);

// X^n(f) = n^{-1/2} sum_x f(x/n) (eta_x - rho), d = 1
[[nodiscard]] double field_value(const Configuration& c, const TestFunction& f, double rho);

// Per-site coefficients of L_n X^n(f) expanded in centered variables
// (d = 1).  With eb = eta - rho,
//   L_n X^n(f) = n^{-1/2} sum_x [ (laplacian_x + linear_x) eb_x
//                + pair_adjacent_x eb_{x-1} eb_x + pair_gap_x eb_{x-2} eb_x
//                + triple_x eb_{x-2} eb_{x-1} eb_x + constant_x ].
struct DynkinExpansion {
  int n = 0;
  double rho = 0;
  double scale = 0;  // n^{-1/2}
  std::vector<double> laplacian;
  std::vector<double> linear;
  std::vector<double> pair_adjacent;
  std::vector<double> pair_gap;
  std::vector<double> triple;
  std::vector<double> constant;  // F(rho) f_x, zero at the stationary root

  // Unscaled contribution of the terms indexed by x, given eb at x-2, x-1, x.
  [[nodiscard]] double site_term(std::size_t x, double e2, double e1, double e0) const noexcept {
    return (laplacian[x] + linear[x]) * e0 + pair_adjacent[x] * e1 * e0 + pair_gap[x] * e2 * e0 +
           triple[x] * e2 * e1 * e0 + constant[x];
  }
  [[nodiscard]] double evaluate(const Configuration& c) const;
  [[nodiscard]] double evaluate(std::span<const std::uint8_t> occ) const;
};

[[nodiscard]] DynkinExpansion dynkin_expansion(const TestFunction& f, const ModelParams& p);

}  // namespace rdsim
