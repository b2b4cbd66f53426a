#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rdsim/dynamics.hpp"

namespace rdsim {

inline constexpr std::size_t kDefaultStateCap = std::size_t{1} << 20;

// Number of configurations 2^{n^d}; throws when above cap.
[[nodiscard]] std::size_t state_count(const TorusGeometry& g, std::size_t cap = kDefaultStateCap);

// Probability vector over states; state s has eta_x = bit x of s.
struct DistributionVector {
  TorusGeometry geometry;
  std::vector<double> p;

  static DistributionVector product(const TorusGeometry& g, double rho, std::size_t cap = kDefaultStateCap);
  static DistributionVector point_mass(const TorusGeometry& g, std::uint64_t state, std::size_t cap = kDefaultStateCap);
  static DistributionVector from_weights(const TorusGeometry& g, std::vector<double> w);

  [[nodiscard]] double total() const;
  // entries >= 0 and total within tol of 1
  [[nodiscard]] bool valid(double tol = 1e-12) const;
};

// Sparse generator n^2 L^ex + L^r over all states (compressed rows,
// off-diagonal entries only; duplicate transitions merged).
class GeneratorMatrix {
 public:
  static GeneratorMatrix build(const ModelParams& p, std::size_t cap = kDefaultStateCap);

  [[nodiscard]] const ModelParams& params() const noexcept { return p_; }
  [[nodiscard]] std::size_t states() const noexcept { return diag_.size(); }
  [[nodiscard]] std::span<const std::uint32_t> columns(std::size_t row) const noexcept {
    return {col_.data() + ptr_[row], ptr_[row + 1] - ptr_[row]};
  }
  [[nodiscard]] std::span<const double> rates(std::size_t row) const noexcept {
    return {val_.data() + ptr_[row], ptr_[row + 1] - ptr_[row]};
  }
  [[nodiscard]] double diagonal(std::size_t row) const noexcept { return diag_[row]; }
  [[nodiscard]] double rate(std::size_t from, std::size_t to) const;
  [[nodiscard]] double row_sum(std::size_t row) const;
  // max_row sum |L(x,y)|
  [[nodiscard]] double norm_inf() const;
  [[nodiscard]] std::size_t max_row_nonzeros() const;

  // (L f)(x) = sum_y r(x,y)(f(y) - f(x))
  void apply(std::span<const double> f, std::span<double> out) const;
  // (mu L)(y) = sum_x mu(x) L(x,y)
  void apply_left(std::span<const double> mu, std::span<double> out) const;

 private:
  explicit GeneratorMatrix(const ModelParams& p) : p_(p) {}

  ModelParams p_;
  std::vector<std::size_t> ptr_;
  std::vector<std::uint32_t> col_;
  std::vector<double> val_;
  std::vector<double> diag_;
};

// Sum of rates of all elementary transitions from -> to, from the rate
// functions (independent of any matrix).
[[nodiscard]] double transition_rate(const ModelParams& p, std::uint64_t from, std::uint64_t to);

struct EvolveControl {
  double sample_dt = 0.01;  // spacing of returned samples
  double cfl = 0.1;         // step = cfl / ||L||
  double min_step = 1e-12;
  std::size_t max_steps = 100'000'000;
};

struct EvolveResult {
  std::vector<double> times;
  std::vector<DistributionVector> states;
  double step = 0;
  double max_mass_drift = 0;
  double min_entry = 0;
};

[[nodiscard]] EvolveResult evolve_master_equation(const GeneratorMatrix& m, const DistributionVector& mu0, double horizon,
                                                  const EvolveControl& control = {});

// mu at time horizon with fixed RK4 step h (which must divide horizon).
[[nodiscard]] std::vector<double> rk4_final(const GeneratorMatrix& m, std::span<const double> mu0, double horizon,
                                            std::size_t steps);

struct RichardsonReport {
  double diff_h = 0;   // |mu_h - mu_{h/2}|_1
  double diff_h2 = 0;  // |mu_{h/2} - mu_{h/4}|_1
  double order = 0;
};

[[nodiscard]] RichardsonReport richardson_check(const GeneratorMatrix& m, const DistributionVector& mu0, double horizon,
                                                std::size_t steps);

// sum mu log(mu / nu); throws std::domain_error when mu is not absolutely
// continuous with respect to nu.
[[nodiscard]] double relative_entropy(const DistributionVector& mu, const DistributionVector& nu);
[[nodiscard]] double relative_entropy(std::span<const double> mu, std::span<const double> nu);

// Gamma(g)(state) = sum_y r(state, y)(g(y) - g(state))^2
[[nodiscard]] double carre_du_champ(std::span<const double> g, const GeneratorMatrix& m, std::size_t state);

enum class AdjointMethod { Summation, Transpose, Polynomial };

// L*1 with respect to nu_rho, tabulated over states.
[[nodiscard]] std::vector<double> adjoint_one(const ModelParams& p, AdjointMethod method,
                                              std::size_t cap = kDefaultStateCap);
[[nodiscard]] std::vector<double> adjoint_one(const GeneratorMatrix& m, AdjointMethod method);

// Coefficients c_A in f = sum_A c_A prod_{x in A} (eta_x - rho), indexed by
// the subset mask A.
[[nodiscard]] std::vector<double> centered_monomial_coefficients(std::span<const double> f, int sites, double rho);
// Same coefficients from nu_rho inner products E[f eb_A] / (rho(1-rho))^{|A|}.
[[nodiscard]] std::vector<double> centered_monomial_coefficients_by_projection(std::span<const double> f, int sites,
                                                                               double rho);

struct YauSample {
  double t = 0;
  double entropy = 0;
  double dHdt = 0;           // centered finite difference of H
  double dHdt_analytic = 0;  // sum (mu L) log g
  double adjoint_term = 0;   // int L*1 g dnu
  double dirichlet = 0;      // int Gamma(sqrt g) dnu
  double rhs = 0;
  bool holds = false;
};

struct YauOptions {
  int samples = 100;
  double cfl = 0.05;
  double relative_tolerance = 1e-8;
};

struct YauReport {
  std::vector<YauSample> samples;
  bool all_hold = false;
  double sup_dHdt = 0;
  double max_relative_excess = 0;  // max(0, (dHdt - rhs - rounding floor) / scale)
  double max_fd_error = 0;  // |dHdt - dHdt_analytic| over samples with t > 0
  double final_entropy = 0;
  double step = 0;
};

[[nodiscard]] YauReport yau_bound_check(const ModelParams& p, const DistributionVector& mu0, double horizon,
                                        const YauOptions& opts = {});

struct InequalityReport {
  double lhs = 0;
  double rhs = 0;
  [[nodiscard]] double margin() const noexcept { return rhs - lhs; }
  [[nodiscard]] bool holds(double tol = 1e-12) const noexcept { return lhs <= rhs + tol; }
};

// int g h (eta_x - eta_y) dnu <= a n^2 int (sqrt g^{xy} - sqrt g)^2 dnu + (a n^2)^{-1} int h^2 g dnu
[[nodiscard]] InequalityReport ibp_inequality_check(const ModelParams& p, std::span<const double> g,
                                                    std::span<const double> h, Site x, Site y, double a);

// int f dmu <= (H(mu|nu) + log int e^{gamma f} dnu) / gamma
[[nodiscard]] InequalityReport entropy_inequality_check(std::span<const double> mu, std::span<const double> nu,
                                                        std::span<const double> f, double gamma);
// mu(A) <= (H(mu|nu) + log 2) / log(1 + 1/nu(A))
[[nodiscard]] InequalityReport entropy_set_inequality_check(std::span<const double> mu, std::span<const double> nu,
                                                            std::span<const std::uint8_t> in_set);

// Exact adjoint against the closed polynomial form.
struct AdjointComparison {
  int n = 0;
  double lambda = 0;
  double rho = 0;
  double summation_vs_transpose = 0;
  double polynomial_vs_exact = 0;
  double max_constant = 0;  // |c_empty|, normalized monomials
  double max_degree_one = 0;
  double mass = 0;  // int L*1 dnu
  bool polynomial_matches = false;
  // nonzero normalized-monomial coefficients of the exact adjoint, grouped
  // by the shape of the subset up to translation (d = 1)
  struct Shape {
    std::vector<int> offsets;  // sorted, last = 0
    double coefficient = 0;    // raw (unnormalized) coefficient
    double predicted = 0;      // from the closed form
    std::size_t count = 0;
  };
  std::vector<Shape> shapes;
};

[[nodiscard]] AdjointComparison compare_adjoint_forms(const ModelParams& p);

}  // namespace rdsim
