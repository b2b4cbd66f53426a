#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rdsim/dynamics.hpp"
#include "rdsim/lattice.hpp"

namespace rdsim {

// Finite-support random variable.
struct DiscreteVariable {
  std::vector<double> values;
  std::vector<double> probs;

  // Throws std::invalid_argument unless sizes match, probabilities are
  // nonnegative and sum to 1 within 1e-12, and values are finite.
  void validate() const;
  [[nodiscard]] double mean() const;
  // log E e^{theta X}, evaluated with a shifted exponent.
  [[nodiscard]] double log_mgf(double theta) const;
  [[nodiscard]] double expect(const std::function<double(double)>& g) const;
  // P(|X| >= a)
  [[nodiscard]] double abs_tail_at_least(double a) const;
};

// eta_0 - rho under Bernoulli(rho).
[[nodiscard]] DiscreteVariable centered_bernoulli(double rho);
// Two-point variable on {a, b} with mean zero.
[[nodiscard]] DiscreteVariable centered_two_point(double a, double b);
// (sum of m independent Bernoulli(rho) - m rho) / sqrt(m), by convolution.
[[nodiscard]] DiscreteVariable scaled_bernoulli_sum(int m, double rho);
// Exact minimal subgaussian parameter of centered Bernoulli(rho).
[[nodiscard]] double bernoulli_optimal_sigma2(double rho);

struct SubgaussianWitness {
  DiscreteVariable variable;
  double sigma2 = 0.25;
  // Positive-half grid size of the log-spaced theta grid
  // +-[1e-3, 20] / sigma, mirrored, plus theta = 0.
  std::size_t grid_points = 400;
};

[[nodiscard]] std::vector<double> mgf_grid(double sigma2, std::size_t points);

// lhs <= rhs counts as a violation when lhs - rhs > 1e-12 max(1, |rhs|).
inline constexpr double kInequalityTolerance = 1e-12;
[[nodiscard]] bool violates(double lhs, double rhs) noexcept;

struct SubgaussianReport {
  double sigma2 = 0;
  std::size_t grid_size = 0;
  std::size_t mgf_violations = 0;
  double mgf_worst_margin = 0;   // min over the grid of theta^2 sigma^2 / 2 - log mgf
  double mgf_worst_theta = 0;
  std::size_t tail_checks = 0;
  std::size_t tail_violations = 0;
  double tail_worst_margin = 0;  // min of 2 exp(-a^2 / 2 sigma^2) - P(|X| >= a)
  double minimal_sigma2 = 0;     // smallest sigma^2 passing the grid check
  bool sharp = false;            // minimal_sigma2 (1 - 1e-6) fails; true when minimal is 0
  [[nodiscard]] bool passed() const noexcept { return mgf_violations == 0 && tail_violations == 0; }
};

// Throws std::invalid_argument on non-centered input (|mean| > 1e-12) or
// sigma2 <= 0.
[[nodiscard]] SubgaussianReport subgaussian_verify(const SubgaussianWitness& w);

struct ChiSquareReport {
  double c = 0;
  double sigma2 = 0;
  double lhs = 0;  // E e^{c X^2}
  double rhs = 0;  // e^{8 c sigma^2}
  bool subgaussian = false;  // the witness passes subgaussian_verify
  [[nodiscard]] double margin() const noexcept { return rhs - lhs; }
  [[nodiscard]] bool passed() const noexcept { return subgaussian && !violates(lhs, rhs); }
};

// Throws std::invalid_argument unless c is in (0, 1 / (4 sigma^2)].
[[nodiscard]] ChiSquareReport chisq_moment_verify(const SubgaussianWitness& w, double c);

using StateFunction = std::function<double(const Configuration&)>;

struct BoundedDifferencesReport {
  std::vector<double> oscillation;  // c_x = max |fn(eta^x) - fn(eta)|
  double oscillation_sq_sum = 0;
  double mean = 0;
  std::size_t checks = 0;
  std::size_t violations = 0;
  double worst_margin = 0;  // min of exp(-2 delta^2 / sum c^2) - nu(fn - E fn >= delta)
  double worst_delta = 0;
  [[nodiscard]] double max_oscillation() const;
  [[nodiscard]] bool passed() const noexcept { return violations == 0; }
};

// Exact enumeration over all 2^{n^d} configurations (n^d <= 16).  The tail
// is checked at every attained positive deviation, where the gap between
// the step function and the bound is smallest, and on the extra deltas.
[[nodiscard]] BoundedDifferencesReport bounded_differences_verify(const StateFunction& fn, const TorusGeometry& g,
                                                                  double rho, const std::vector<double>& deltas = {});

struct DynkinOscillation {
  int n = 0;
  double exact = 0;    // max_x c_x of L_n X^n(f)
  double claimed = 0;  // 3 n^{-1/2} ||f||_inf
  BoundedDifferencesReport report;
  [[nodiscard]] bool claim_holds() const noexcept { return exact <= claimed * (1 + kInequalityTolerance); }
};

// Bounded differences for fn = L_n X^n(f) on the d = 1 torus of p.
[[nodiscard]] DynkinOscillation dynkin_bounded_differences(const TestFunction& f, const ModelParams& p);

// 1 + theta / (2 - theta); throws std::invalid_argument unless theta in (0, 2).
[[nodiscard]] double tail_moment_constant(double theta);

// |X| for a discrete variable, or X uniform on [-a, a].
struct TailWitness {
  enum class Kind { Discrete, Uniform };
  Kind kind = Kind::Discrete;
  DiscreteVariable variable;
  double half_width = 1.0;

  static TailWitness discrete(DiscreteVariable v);
  static TailWitness uniform(double a);
  // sup_{delta > 0} delta^2 P(|X| > delta), exact.
  [[nodiscard]] double tail_sup() const;
  [[nodiscard]] double abs_moment(double theta) const;
};

struct TailMomentReport {
  double theta = 0;
  double tail_constant = 0;   // C in P(|X| > delta) <= C / delta^2
  double hypothesis_sup = 0;  // sup delta^2 P(|X| > delta)
  double lhs = 0;             // E |X|^theta
  double rhs = 0;             // C(theta) C^{theta / 2}
  [[nodiscard]] bool hypothesis_holds() const noexcept { return !violates(hypothesis_sup, tail_constant); }
  [[nodiscard]] double margin() const noexcept { return rhs - lhs; }
  [[nodiscard]] bool passed() const noexcept { return hypothesis_holds() && !violates(lhs, rhs); }
};

[[nodiscard]] TailMomentReport tail_to_moment_verify(const TailWitness& w, double tail_constant, double theta);

// xi_x = r^{-d} sum_{a in [0, r)^d} (eta_{x+a} - rho): dependency range r.
struct HolderInstance {
  int dim = 1;
  int n = 8;
  int window = 2;
  int k = 2;
  double rho = 0.5;
  double gamma = 1.0;
  // Hoelder exponent: 0 uses the class count of the partition.
  double exponent = 0;
};

struct HolderReport {
  std::size_t classes = 0;
  double exponent = 0;
  double direct = 0;      // (1/gamma) log int e^{gamma sum_x xi_x^2}
  double grouped = 0;     // (1/(gamma K)) sum_i log int e^{gamma K sum_{B_i} xi_x^2}
  double factorized = 0;  // (1/(gamma K)) sum_x log int e^{gamma K xi_x^2}
  bool independent_classes = false;  // k >= window: grouped equals factorized
  double factorization_error = 0;
  [[nodiscard]] bool passed() const noexcept {
    return !violates(direct, grouped) &&
           (!independent_classes || factorization_error <= 1e-10 * std::max(1.0, std::abs(grouped)));
  }
};

// Exact evaluation by enumeration (n^d <= 16).
[[nodiscard]] HolderReport holder_grouping_verify(const HolderInstance& h);

// Smallest C with log int e^{V / C} dnu_rho <= n / l, i.e. the constant in
// int V f dnu <= C (H(f) + n / l) for all densities f, for
// V = sum_x eb_{x-1} (1/l) sum_{y=0}^{l-1} eb_{x+y} on the d = 1 torus.
struct ReplacementPoint {
  int n = 0;
  int ell = 0;
  double constant = 0;
};

[[nodiscard]] double replacement_constant(int n, int ell, double rho);
[[nodiscard]] std::vector<ReplacementPoint> replacement_constant_sweep(const std::vector<int>& ns,
                                                                       const std::vector<int>& ells, double rho);

// One inequality evaluated on one witness; margin = rhs - lhs.
struct CheckRecord {
  std::string name;
  double lhs = 0;
  double rhs = 0;
  bool passed = false;
  [[nodiscard]] double margin() const noexcept { return rhs - lhs; }
};

struct SuiteResult {
  std::string name;
  std::vector<CheckRecord> checks;
  std::vector<std::pair<std::string, double>> reported;  // diagnostics with no pass/fail
  [[nodiscard]] std::size_t violations() const noexcept;
  [[nodiscard]] double worst_margin() const noexcept;
  [[nodiscard]] bool passed() const noexcept { return !checks.empty() && violations() == 0; }
};

// Suites: subgaussian, chisq, bdiff, tail, holder, replacement.
[[nodiscard]] const std::vector<std::string>& concentration_suites();
// Throws std::invalid_argument on an unknown suite name.
[[nodiscard]] SuiteResult run_concentration_suite(const std::string& name, unsigned threads = 0);
// The replacement suite on a custom (n, l) grid.
[[nodiscard]] SuiteResult replacement_suite(const std::vector<int>& ns, const std::vector<int>& ells, double rho);

}  // namespace rdsim
