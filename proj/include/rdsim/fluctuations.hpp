#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rdsim/dynamics.hpp"
#include "rdsim/kmc.hpp"
#include "rdsim/stats.hpp"

namespace rdsim {

// Sampled pieces of X_t = X_0 + M_t + int_0^t L_n X ds for one test function.
//   J: sum of the jumps of X,  C: int (sum over transitions of rate x jump) ds,
//   M = J - C,  A: int of the Dynkin expansion.
struct FieldTrajectory {
  std::string label;
  std::vector<double> times;
  std::vector<double> field;  // X_t by direct evaluation
  std::vector<double> jumps;
  std::vector<double> compensator;
  std::vector<double> martingale;
  std::vector<double> drift;
  std::vector<double> qv_exclusion;  // int n sum (f_{x+1}-f_x)^2 (eta_x-eta_{x+1})^2 ds
  std::vector<double> qv_reaction;   // int (1/n) sum f_x^2 c_x ds
  double max_residual = 0;           // max |X_t - X_0 - M_t - A_t|

  [[nodiscard]] double qv(std::size_t i) const { return qv_exclusion[i] + qv_reaction[i]; }
};

// Observer for run_ctmc / replay (d = 1) tracking the decomposition for a
// list of test functions on the grid t_k = k * sample_dt, k = 0..K.  When
// full is false only the field values are recorded.
class FieldObserver {
 public:
  FieldObserver(const ModelParams& p, std::vector<TestFunction> functions, const Configuration& initial,
                double horizon, double sample_dt, bool full = true);

  void on_event(const Event& e, const std::vector<std::uint8_t>& occ_before);
  void on_end(double horizon, const std::vector<std::uint8_t>& occ);

  [[nodiscard]] const std::vector<FieldTrajectory>& result() const noexcept { return out_; }
  [[nodiscard]] std::vector<FieldTrajectory>&& take() noexcept { return std::move(out_); }

 private:
  struct Track {
    std::vector<double> f;
    DynkinExpansion dyn;
    double field_at_start = 0;
    double jumps = 0, comp = 0, drift = 0, qe = 0, qr = 0;
    double rate_comp = 0, rate_drift = 0, rate_qe = 0, rate_qr = 0;
  };

  [[nodiscard]] double rate_c(int y) const noexcept;
  void local(int z, double sign);
  void recompute();
  void advance(double t);
  void record(double t);
  void flip(int z);

  ModelParams p_;
  int n_;
  double inv_sqrt_n_;
  bool full_;
  std::vector<std::uint8_t> occ_;
  std::vector<Track> tracks_;
  std::vector<FieldTrajectory> out_;
  double horizon_;
  double sample_dt_;
  std::size_t samples_;
  std::size_t next_sample_ = 0;
  double clock_ = 0;
};

[[nodiscard]] FieldTrajectory martingale_decompose(const Trajectory& tr, const TestFunction& f, const ModelParams& p,
                                                   double sample_dt);

struct QuadraticVariation {
  std::vector<double> times;
  std::vector<double> exclusion;
  std::vector<double> reaction;
  std::vector<double> total;
};

[[nodiscard]] QuadraticVariation predictable_qv(const Trajectory& tr, const TestFunction& f, const ModelParams& p,
                                                double sample_dt);

// Var_{nu_rho} X(f) = rho(1-rho)(1/n) sum f(x/n)^2
[[nodiscard]] double field_variance_exact(const TestFunction& f, int n, double rho);
// (1/n) sum_x f(x/n) g(x/n)
[[nodiscard]] double riemann_inner(const TestFunction& f, const TestFunction& g, int n);
// int_T f g du (midpoint rule on a fine grid)
[[nodiscard]] double continuum_inner(const TestFunction& f, const TestFunction& g);

struct CovarianceReport {
  double empirical = 0;
  double se = 0;
  double exact = 0;      // rho(1-rho)(1/n) sum f g
  double continuum = 0;  // rho(1-rho) int f g
  std::size_t samples = 0;
  [[nodiscard]] double z() const { return se > 0 ? (empirical - exact) / se : 0.0; }
};

[[nodiscard]] CovarianceReport initial_covariance_test(const TestFunction& f, const TestFunction& g, double rho, int n,
                                                       std::size_t samples, std::uint64_t seed);

// Replicated runs from nu_rho samples; replica r uses streams (seed, 2r) for
// the initial configuration and (seed, 2r + 1) for the dynamics.  The
// dynamics run for burn_in first, after which observation starts at t = 0.
struct EnsembleSpec {
  ModelParams params;
  std::vector<TestFunction> functions;
  double horizon = 1.0;
  double sample_dt = 0.1;
  double burn_in = 0.0;
  std::size_t replicas = 100;
  std::uint64_t seed = 1;
  bool full = true;
  unsigned threads = 0;
};

// [replica][function]
[[nodiscard]] std::vector<std::vector<FieldTrajectory>> run_field_ensemble(const EnsembleSpec& spec);

struct MartingaleReport {
  int n = 0;
  std::size_t replicas = 0;
  double horizon = 0;
  double max_residual = 0;
  MeanEstimate m_final;      // M_T
  MeanEstimate n_final;      // M_T^2 - <M>_T
  MeanEstimate qv_final;     // <M>_T
  double increment_slope = 0;  // regression of M_T - M_{T/2} on X_{T/2}
  double increment_slope_se = 0;
};

// Uses the first function of the ensemble; the sample grid must contain T/2.
[[nodiscard]] MartingaleReport martingale_report(const std::vector<std::vector<FieldTrajectory>>& ens);

struct QvReport {
  int n = 0;
  double horizon = 0;
  MeanEstimate exclusion_rate;  // qv_exclusion(T) / T
  MeanEstimate reaction_rate;   // qv_reaction(T) / T
  double exclusion_riemann = 0;    // 2 rho(1-rho) (1/n) sum f'(x/n)^2
  double exclusion_continuum = 0;  // 2 rho(1-rho) ||f'||^2
  double exclusion_discrete = 0;   // 2 rho(1-rho) n sum (f_{x+1}-f_x)^2
  double reaction_product = 0;     // E[c] (1/n) sum f^2
  [[nodiscard]] double exclusion_relative_error() const {
    return std::abs(exclusion_rate.mean - exclusion_riemann) / exclusion_riemann;
  }
};

[[nodiscard]] QvReport qv_report(const std::vector<std::vector<FieldTrajectory>>& ens, const ModelParams& p,
                                 const TestFunction& f);

// Candidate drift constants added to 4 pi^2 k^2.
[[nodiscard]] std::array<double, 3> ou_drift_candidates(double lambda, double rho);

struct OuFit {
  int k = 0;
  double theta = 0;
  double se = 0;
  double intercept = 0;
  double theta_guess = 0;
  std::array<double, 3> candidates{};  // 4 pi^2 k^2 + constant
  std::size_t lags = 0;
  std::size_t replicas = 0;
  [[nodiscard]] double deviation(int i) const { return theta - candidates[static_cast<std::size_t>(i)]; }
};

// series[r] = Y at times j h for replica r.  Log-linear regression of the
// normalized autocorrelation over lags [0.05, 0.5] / theta_guess; jackknife
// SE over `blocks` replica blocks.  Throws std::domain_error when the lag
// grid has fewer than 3 points or a correlation is nonpositive.
[[nodiscard]] OuFit ou_fit(const std::vector<std::vector<double>>& series, double h, int k, const ModelParams& p,
                           std::size_t blocks = 20);

struct OuExperiment {
  ModelParams params;
  std::vector<int> modes{1, 2};
  std::size_t replicas = 1000;
  double horizon = 0.05;
  double burn_in = 0.03;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

[[nodiscard]] std::vector<OuFit> run_ou_experiment(const OuExperiment& ex);

// n^{-1/2} int_0^T V(eta_s) ds, V = sum_x phi(x/n) eb_{A0 + x} eb_x (d = 1).
class BgObserver {
 public:
  BgObserver(const ModelParams& p, const TestFunction& phi, const OffsetSet& a0, const Configuration& initial);
  void on_event(const Event& e, const std::vector<std::uint8_t>& occ_before);
  void on_end(double horizon, const std::vector<std::uint8_t>& occ);
  [[nodiscard]] double value() const noexcept { return integral_; }
  [[nodiscard]] double current_v() const noexcept { return v_; }

 private:
  [[nodiscard]] double term(int x) const noexcept;
  void flip(int z);

  int n_;
  double rho_;
  std::vector<double> phi_;
  std::vector<int> offsets_;
  std::vector<std::uint8_t> occ_;
  double v_ = 0;
  double integral_ = 0;
  double clock_ = 0;
};

[[nodiscard]] double bg_statistic(const Trajectory& tr, const TestFunction& phi, const OffsetSet& a0, double rho);

struct BgPoint {
  int n = 0;
  MeanEstimate mean;
  MeanEstimate second_moment;
};

struct BgReport {
  std::vector<BgPoint> points;
  LinearFit loglog;  // log second moment vs log n
  bool strictly_decreasing = false;
  bool separated = false;  // 2-SE intervals of first and last n disjoint
};

struct BgExperiment {
  double lambda = 1.0;
  std::vector<int> ns{32, 64, 128};
  TestFunction phi = TestFunction::cosine_mode(1);
  OffsetSet a0{1, {{-1}}};
  double horizon = 0.1;
  std::size_t replicas = 1000;
  std::uint64_t seed = 1;
  double rho = -1;  // < 0: stationary root
  unsigned threads = 0;
};

[[nodiscard]] BgReport run_bg_experiment(const BgExperiment& ex);

enum class LocalFunction { Zero, CenteredRate, GradientSquared };

// Exact nu_rho mean of the uncentered local function.
[[nodiscard]] double local_function_mean(LocalFunction psi, const ModelParams& p);

struct TimeAveragePoint {
  int n = 0;
  MeanEstimate abs_value;  // |int_0^T (1/n) sum G_x psi_x ds|
};

struct TimeAverageReport {
  LocalFunction psi = LocalFunction::CenteredRate;
  double centering = 0;
  std::vector<TimeAveragePoint> points;
  LinearFit loglog;
};

struct TimeAverageExperiment {
  double lambda = 1.0;
  std::vector<int> ns{32, 64, 128, 256};
  TestFunction weight = TestFunction::cosine_mode(1);
  LocalFunction psi = LocalFunction::CenteredRate;
  double horizon = 0.02;
  std::size_t replicas = 100;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

[[nodiscard]] TimeAverageReport time_average_local_check(const TimeAverageExperiment& ex);

}  // namespace rdsim
