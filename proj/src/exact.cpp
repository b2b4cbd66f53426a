#include "rdsim/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace rdsim {

namespace {

inline int bit(std::uint64_t s, Site x) { return static_cast<int>((s >> x) & 1u); }

double rate_on_state(const ModelParams& p, std::uint64_t s, Site x) {
  if (bit(s, x)) return 1.0;
  const auto& g = p.geometry;
  int m = 0;
  for (int j = 0; j < g.dim(); ++j) m += bit(s, g.neighbor(x, j, -1)) & bit(s, g.neighbor(x, j, +1));
  return 1.0 + p.lambda * m;
}

// All elementary transitions out of s, with multiplicity.
template <class F>
void for_each_transition(const ModelParams& p, std::uint64_t s, F&& fn) {
  const auto& g = p.geometry;
  const double n2 = p.exchange_rate();
  for (Site x = 0; x < g.site_count(); ++x) {
    for (int j = 0; j < g.dim(); ++j) {
      Site y = g.neighbor(x, j, +1);
      if (bit(s, x) != bit(s, y)) fn(s ^ (std::uint64_t{1} << x) ^ (std::uint64_t{1} << y), n2);
    }
    fn(s ^ (std::uint64_t{1} << x), rate_on_state(p, s, x));
  }
}

double product_weight(std::uint64_t s, int sites, double rho) {
  int k = std::popcount(s);
  return std::pow(rho, k) * std::pow(1.0 - rho, sites - k);
}

std::vector<double> product_table(const TorusGeometry& g, double rho, std::size_t cap) {
  const std::size_t S = state_count(g, cap);
  const int N = static_cast<int>(g.site_count());
  std::vector<double> w(S);
  for (std::size_t s = 0; s < S; ++s) w[s] = product_weight(s, N, rho);
  return w;
}

void rk4_step(const GeneratorMatrix& m, std::vector<double>& mu, double h, std::vector<double>& k1,
              std::vector<double>& k2, std::vector<double>& k3, std::vector<double>& k4, std::vector<double>& tmp) {
  const std::size_t S = mu.size();
  m.apply_left(mu, k1);
  for (std::size_t i = 0; i < S; ++i) tmp[i] = mu[i] + 0.5 * h * k1[i];
  m.apply_left(tmp, k2);
  for (std::size_t i = 0; i < S; ++i) tmp[i] = mu[i] + 0.5 * h * k2[i];
  m.apply_left(tmp, k3);
  for (std::size_t i = 0; i < S; ++i) tmp[i] = mu[i] + h * k3[i];
  m.apply_left(tmp, k4);
  for (std::size_t i = 0; i < S; ++i) mu[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
}

double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

}  // namespace

std::size_t state_count(const TorusGeometry& g, std::size_t cap) {
  const std::size_t N = g.site_count();
  if (N >= 63 || (std::size_t{1} << N) > cap)
    throw std::length_error("state space 2^" + std::to_string(N) + " exceeds the configured cap");
  return std::size_t{1} << N;
}

DistributionVector DistributionVector::product(const TorusGeometry& g, double rho, std::size_t cap) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("density must lie in (0,1)");
  return DistributionVector{g, product_table(g, rho, cap)};
}

DistributionVector DistributionVector::point_mass(const TorusGeometry& g, std::uint64_t state, std::size_t cap) {
  const std::size_t S = state_count(g, cap);
  if (state >= S) throw std::invalid_argument("state out of range");
  DistributionVector d{g, std::vector<double>(S, 0.0)};
  d.p[state] = 1.0;
  return d;
}

DistributionVector DistributionVector::from_weights(const TorusGeometry& g, std::vector<double> w) {
  if (w.size() != state_count(g, std::size_t{1} << 62)) throw std::invalid_argument("weight table has wrong length");
  double t = 0;
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("weights must be finite and nonnegative");
    t += v;
  }
  if (!(t > 0)) throw std::invalid_argument("weights sum to zero");
  for (double& v : w) v /= t;
  return DistributionVector{g, std::move(w)};
}

double DistributionVector::total() const {
  double t = 0;
  for (double v : p) t += v;
  return t;
}

bool DistributionVector::valid(double tol) const {
  for (double v : p)
    if (!(v >= 0.0)) return false;
  return std::abs(total() - 1.0) <= tol;
}

GeneratorMatrix GeneratorMatrix::build(const ModelParams& p, std::size_t cap) {
  p.validate();
  const std::size_t S = state_count(p.geometry, cap);
  GeneratorMatrix m(p);
  m.ptr_.reserve(S + 1);
  m.ptr_.push_back(0);
  m.diag_.resize(S);
  std::vector<std::pair<std::uint32_t, double>> row;
  for (std::size_t s = 0; s < S; ++s) {
    row.clear();
    for_each_transition(p, s, [&](std::uint64_t t, double r) { row.emplace_back(static_cast<std::uint32_t>(t), r); });
    std::sort(row.begin(), row.end());
    double sum = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0 && row[i].first == row[i - 1].first) {
        m.val_.back() += row[i].second;
      } else {
        m.col_.push_back(row[i].first);
        m.val_.push_back(row[i].second);
      }
      sum += row[i].second;
    }
    m.diag_[s] = -sum;
    m.ptr_.push_back(m.col_.size());
  }
  return m;
}

double GeneratorMatrix::rate(std::size_t from, std::size_t to) const {
  if (from == to) return diag_[from];
  auto cols = columns(from);
  auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<std::uint32_t>(to));
  if (it == cols.end() || *it != to) return 0.0;
  return rates(from)[static_cast<std::size_t>(it - cols.begin())];
}

double GeneratorMatrix::row_sum(std::size_t row) const {
  double s = diag_[row];
  for (double v : rates(row)) s += v;
  return s;
}

double GeneratorMatrix::norm_inf() const {
  double best = 0;
  for (double d : diag_) best = std::max(best, 2 * std::abs(d));
  return best;
}

std::size_t GeneratorMatrix::max_row_nonzeros() const {
  std::size_t best = 0;
  for (std::size_t r = 0; r < states(); ++r) best = std::max(best, ptr_[r + 1] - ptr_[r]);
  return best;
}

void GeneratorMatrix::apply(std::span<const double> f, std::span<double> out) const {
  for (std::size_t x = 0; x < states(); ++x) {
    double s = 0;
    auto cols = columns(x);
    auto vals = rates(x);
    for (std::size_t k = 0; k < cols.size(); ++k) s += vals[k] * (f[cols[k]] - f[x]);
    out[x] = s;
  }
}

void GeneratorMatrix::apply_left(std::span<const double> mu, std::span<double> out) const {
  for (std::size_t y = 0; y < states(); ++y) out[y] = mu[y] * diag_[y];
  for (std::size_t x = 0; x < states(); ++x) {
    const double mx = mu[x];
    auto cols = columns(x);
    auto vals = rates(x);
    for (std::size_t k = 0; k < cols.size(); ++k) out[cols[k]] += mx * vals[k];
  }
}

double transition_rate(const ModelParams& p, std::uint64_t from, std::uint64_t to) {
  double r = 0;
  for_each_transition(p, from, [&](std::uint64_t t, double v) {
    if (t == to) r += v;
  });
  return r;
}

std::vector<double> rk4_final(const GeneratorMatrix& m, std::span<const double> mu0, double horizon, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("at least one step required");
  const std::size_t S = m.states();
  std::vector<double> mu(mu0.begin(), mu0.end()), k1(S), k2(S), k3(S), k4(S), tmp(S);
  const double h = horizon / static_cast<double>(steps);
  for (std::size_t i = 0; i < steps; ++i) rk4_step(m, mu, h, k1, k2, k3, k4, tmp);
  return mu;
}

EvolveResult evolve_master_equation(const GeneratorMatrix& m, const DistributionVector& mu0, double horizon,
                                    const EvolveControl& control) {
  if (!mu0.valid(1e-10)) throw std::invalid_argument("initial distribution is not a probability vector");
  if (mu0.p.size() != m.states()) throw std::invalid_argument("distribution length does not match generator");
  if (!(horizon > 0) || !(control.sample_dt > 0)) throw std::invalid_argument("horizon and sample spacing must be > 0");
  const std::size_t samples = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(horizon / control.sample_dt)));
  const double spacing = horizon / static_cast<double>(samples);
  const double norm = std::max(m.norm_inf(), 1e-300);
  const std::size_t per = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(spacing * norm / control.cfl)));
  const double h = spacing / static_cast<double>(per);
  if (h < control.min_step) throw std::underflow_error("master equation step size underflow");
  if (per * samples > control.max_steps) throw std::underflow_error("master equation step count exceeds limit");

  EvolveResult res;
  res.step = h;
  const std::size_t S = m.states();
  std::vector<double> mu = mu0.p, k1(S), k2(S), k3(S), k4(S), tmp(S);
  res.times.push_back(0.0);
  res.states.push_back(mu0);
  res.min_entry = *std::min_element(mu.begin(), mu.end());
  for (std::size_t k = 1; k <= samples; ++k) {
    for (std::size_t i = 0; i < per; ++i) rk4_step(m, mu, h, k1, k2, k3, k4, tmp);
    double t = 0;
    for (double v : mu) {
      t += v;
      res.min_entry = std::min(res.min_entry, v);
    }
    res.max_mass_drift = std::max(res.max_mass_drift, std::abs(t - 1.0));
    res.times.push_back(spacing * static_cast<double>(k));
    res.states.push_back(DistributionVector{mu0.geometry, mu});
  }
  return res;
}

RichardsonReport richardson_check(const GeneratorMatrix& m, const DistributionVector& mu0, double horizon,
                                  std::size_t steps) {
  auto a = rk4_final(m, mu0.p, horizon, steps);
  auto b = rk4_final(m, mu0.p, horizon, 2 * steps);
  auto c = rk4_final(m, mu0.p, horizon, 4 * steps);
  RichardsonReport r;
  r.diff_h = l1_distance(a, b);
  r.diff_h2 = l1_distance(b, c);
  r.order = std::log2(r.diff_h / r.diff_h2);
  return r;
}

double relative_entropy(std::span<const double> mu, std::span<const double> nu) {
  if (mu.size() != nu.size()) throw std::invalid_argument("distribution lengths differ");
  double h = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] <= 0) continue;
    if (!(nu[i] > 0)) throw std::domain_error("relative entropy is infinite: mu not absolutely continuous w.r.t. nu");
    h += mu[i] * std::log(mu[i] / nu[i]);
  }
  return std::max(h, 0.0);
}

double relative_entropy(const DistributionVector& mu, const DistributionVector& nu) {
  return relative_entropy(std::span<const double>(mu.p), std::span<const double>(nu.p));
}

double carre_du_champ(std::span<const double> g, const GeneratorMatrix& m, std::size_t state) {
  double s = 0;
  auto cols = m.columns(state);
  auto vals = m.rates(state);
  for (std::size_t k = 0; k < cols.size(); ++k) {
    double d = g[cols[k]] - g[state];
    s += vals[k] * d * d;
  }
  return s;
}

std::vector<double> adjoint_one(const GeneratorMatrix& m, AdjointMethod method) {
  const ModelParams& p = m.params();
  const auto& g = p.geometry;
  const std::size_t S = m.states();
  const int N = static_cast<int>(g.site_count());
  const double rho = p.rho;
  std::vector<double> out(S, 0.0);
  switch (method) {
    case AdjointMethod::Summation: {
      const double odds = rho / (1.0 - rho);
      std::set<std::uint64_t> targets;
      for (std::size_t s = 0; s < S; ++s) {
        targets.clear();
        for_each_transition(p, s, [&](std::uint64_t t, double) { targets.insert(t); });
        double acc = 0;
        for (std::uint64_t y : targets) {
          int dk = std::popcount(y) - std::popcount(static_cast<std::uint64_t>(s));
          acc += std::pow(odds, dk) * transition_rate(p, y, s) - transition_rate(p, s, y);
        }
        out[s] = acc;
      }
      break;
    }
    case AdjointMethod::Transpose: {
      auto nu = product_table(g, rho, S);
      std::vector<double> left(S);
      m.apply_left(nu, left);
      for (std::size_t s = 0; s < S; ++s) out[s] = left[s] / nu[s];
      break;
    }
    case AdjointMethod::Polynomial: {
      const double lam = p.lambda;
      for (std::size_t s = 0; s < S; ++s) {
        double acc = 0;
        for (Site x = 0; x < static_cast<Site>(N); ++x) {
          const double e0 = bit(s, x) - rho;
          for (int j = 0; j < g.dim(); ++j) {
            Site x1 = g.neighbor(x, j, -1);
            Site x2 = g.neighbor(x1, j, -1);
            const double e1 = bit(s, x1) - rho, e2 = bit(s, x2) - rho;
            acc += 2 * lam * e1 * e0 + lam / rho * e2 * e1 * e0;
          }
        }
        out[s] = acc;
      }
      break;
    }
  }
  return out;
}

std::vector<double> adjoint_one(const ModelParams& p, AdjointMethod method, std::size_t cap) {
  return adjoint_one(GeneratorMatrix::build(p, cap), method);
}

std::vector<double> centered_monomial_coefficients(std::span<const double> f, int sites, double rho) {
  const std::size_t S = std::size_t{1} << sites;
  if (f.size() != S) throw std::invalid_argument("table length must be 2^sites");
  std::vector<double> c(f.begin(), f.end());
  for (int i = 0; i < sites; ++i) {
    const std::size_t b = std::size_t{1} << i;
    for (std::size_t s = 0; s < S; ++s) {
      if (s & b) continue;
      const double f0 = c[s], f1 = c[s | b];
      c[s] = (1 - rho) * f0 + rho * f1;
      c[s | b] = f1 - f0;
    }
  }
  return c;
}

std::vector<double> centered_monomial_coefficients_by_projection(std::span<const double> f, int sites, double rho) {
  const std::size_t S = std::size_t{1} << sites;
  if (f.size() != S) throw std::invalid_argument("table length must be 2^sites");
  std::vector<double> w(S);
  for (std::size_t s = 0; s < S; ++s) w[s] = product_weight(s, sites, rho);
  std::vector<double> c(S);
  const double var = rho * (1 - rho);
  for (std::size_t a = 0; a < S; ++a) {
    double acc = 0;
    for (std::size_t s = 0; s < S; ++s) {
      double mono = 1;
      for (int i = 0; i < sites; ++i)
        if ((a >> i) & 1u) mono *= bit(s, i) - rho;
      acc += w[s] * f[s] * mono;
    }
    c[a] = acc / std::pow(var, std::popcount(a));
  }
  return c;
}

YauReport yau_bound_check(const ModelParams& p, const DistributionVector& mu0, double horizon, const YauOptions& opts) {
  if (!(horizon > 0) || opts.samples < 1) throw std::invalid_argument("horizon and sample count must be positive");
  const GeneratorMatrix m = GeneratorMatrix::build(p);
  const std::size_t S = m.states();
  if (mu0.p.size() != S) throw std::invalid_argument("distribution length does not match generator");
  const std::vector<double> nu = product_table(p.geometry, p.rho, S);
  const std::vector<double> lstar = adjoint_one(m, AdjointMethod::Transpose);

  const double spacing = horizon / opts.samples;
  const std::size_t per = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(spacing * std::max(m.norm_inf(), 1e-300) / opts.cfl)));
  const double h = spacing / static_cast<double>(per);
  const std::size_t total_steps = per * static_cast<std::size_t>(opts.samples) + 2;

  YauReport rep;
  rep.step = h;
  std::vector<double> H(total_steps + 1);
  std::vector<std::vector<double>> snapshots;
  std::vector<double> mu = mu0.p, k1(S), k2(S), k3(S), k4(S), tmp(S);
  H[0] = relative_entropy(mu, nu);
  snapshots.push_back(mu);
  for (std::size_t i = 1; i <= total_steps; ++i) {
    rk4_step(m, mu, h, k1, k2, k3, k4, tmp);
    H[i] = relative_entropy(mu, nu);
    if (i % per == 0 && i / per <= static_cast<std::size_t>(opts.samples)) snapshots.push_back(mu);
  }

  std::vector<double> gvec(S), root(S), flux(S);
  rep.all_hold = true;
  for (int k = 0; k <= opts.samples; ++k) {
    const auto& mk = snapshots[k];
    YauSample smp;
    smp.t = spacing * k;
    const std::size_t i = static_cast<std::size_t>(k) * per;
    smp.entropy = H[i];
    for (std::size_t s = 0; s < S; ++s) {
      gvec[s] = mk[s] / nu[s];
      root[s] = std::sqrt(std::max(gvec[s], 0.0));
    }
    m.apply_left(mk, flux);
    double analytic = 0, adj = 0, dir = 0, adj_abs = 0;
    for (std::size_t s = 0; s < S; ++s) {
      if (gvec[s] > 0) analytic += flux[s] * std::log(gvec[s]);
      adj += mk[s] * lstar[s];
      adj_abs += std::abs(mk[s] * lstar[s]);
      dir += nu[s] * carre_du_champ(root, m, s);
    }
    smp.dHdt_analytic = analytic;
    smp.adjoint_term = adj;
    smp.dirichlet = dir;
    smp.rhs = adj - dir;
    if (k == 0)
      smp.dHdt = analytic;
    else
      smp.dHdt = (-H[i + 2] + 8 * H[i + 1] - 8 * H[i - 1] + H[i - 2]) / (12 * h);
    const double scale = std::max({std::abs(smp.dHdt), std::abs(smp.rhs), std::abs(adj), dir});
    const double excess = smp.dHdt - smp.rhs;
    // rounding floor of the cancelling sum int L*1 g dnu
    const double floor = 64 * std::numeric_limits<double>::epsilon() * adj_abs;
    smp.holds = excess <= opts.relative_tolerance * scale + floor;
    if (scale > 0) rep.max_relative_excess = std::max(rep.max_relative_excess, (excess - floor) / scale);
    if (k > 0) {
      double fd_err = std::abs(smp.dHdt - analytic) / std::max(std::abs(analytic), 1e-300);
      rep.max_fd_error = std::max(rep.max_fd_error, fd_err);
    }
    rep.all_hold = rep.all_hold && smp.holds;
    rep.sup_dHdt = k == 0 ? smp.dHdt : std::max(rep.sup_dHdt, smp.dHdt);
    rep.samples.push_back(smp);
  }
  rep.final_entropy = rep.samples.back().entropy;
  return rep;
}

InequalityReport ibp_inequality_check(const ModelParams& p, std::span<const double> g, std::span<const double> h,
                                      Site x, Site y, double a) {
  const std::size_t S = state_count(p.geometry);
  if (g.size() != S || h.size() != S) throw std::invalid_argument("tables must cover every state");
  if (!(a > 0)) throw std::invalid_argument("a must be > 0");
  const auto nu = product_table(p.geometry, p.rho, S);
  double hmax = 0, mass = 0;
  for (std::size_t s = 0; s < S; ++s) {
    hmax = std::max(hmax, std::abs(h[s]));
    if (g[s] < 0) throw std::invalid_argument("density must be nonnegative");
    mass += nu[s] * g[s];
  }
  if (std::abs(mass - 1.0) > 1e-9) throw std::invalid_argument("density must integrate to 1 against nu_rho");
  const std::uint64_t swap_mask = (std::uint64_t{1} << x) | (std::uint64_t{1} << y);
  auto swapped = [&](std::size_t s) -> std::size_t {
    return bit(s, x) == bit(s, y) ? s : s ^ swap_mask;
  };
  for (std::size_t s = 0; s < S; ++s)
    if (std::abs(h[swapped(s)] - h[s]) > 1e-12 * std::max(1.0, hmax))
      throw std::invalid_argument("h is not invariant under the exchange");
  const double an2 = a * p.exchange_rate();
  InequalityReport r;
  double dir = 0, quad = 0;
  for (std::size_t s = 0; s < S; ++s) {
    r.lhs += nu[s] * g[s] * h[s] * (bit(s, x) - bit(s, y));
    double d = std::sqrt(g[swapped(s)]) - std::sqrt(g[s]);
    dir += nu[s] * d * d;
    quad += nu[s] * h[s] * h[s] * g[s];
  }
  r.rhs = an2 * dir + quad / an2;
  return r;
}

InequalityReport entropy_inequality_check(std::span<const double> mu, std::span<const double> nu,
                                          std::span<const double> f, double gamma) {
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be > 0");
  if (mu.size() != nu.size() || f.size() != mu.size()) throw std::invalid_argument("table lengths differ");
  InequalityReport r;
  for (std::size_t s = 0; s < mu.size(); ++s) r.lhs += f[s] * mu[s];
  double top = -INFINITY;
  for (std::size_t s = 0; s < f.size(); ++s)
    if (nu[s] > 0) top = std::max(top, gamma * f[s]);
  double z = 0;
  for (std::size_t s = 0; s < f.size(); ++s)
    if (nu[s] > 0) z += nu[s] * std::exp(gamma * f[s] - top);
  r.rhs = (relative_entropy(mu, nu) + top + std::log(z)) / gamma;
  return r;
}

InequalityReport entropy_set_inequality_check(std::span<const double> mu, std::span<const double> nu,
                                              std::span<const std::uint8_t> in_set) {
  if (mu.size() != nu.size() || in_set.size() != mu.size()) throw std::invalid_argument("table lengths differ");
  double nuA = 0;
  InequalityReport r;
  for (std::size_t s = 0; s < mu.size(); ++s)
    if (in_set[s]) {
      nuA += nu[s];
      r.lhs += mu[s];
    }
  if (!(nuA > 0)) throw std::invalid_argument("set must have positive reference mass");
  r.rhs = (relative_entropy(mu, nu) + std::log(2.0)) / std::log1p(1.0 / nuA);
  return r;
}

AdjointComparison compare_adjoint_forms(const ModelParams& p) {
  const GeneratorMatrix m = GeneratorMatrix::build(p);
  const std::size_t S = m.states();
  const int N = static_cast<int>(p.geometry.site_count());
  const double rho = p.rho;
  auto sum = adjoint_one(m, AdjointMethod::Summation);
  auto tr = adjoint_one(m, AdjointMethod::Transpose);
  auto poly = adjoint_one(m, AdjointMethod::Polynomial);
  const auto nu = product_table(p.geometry, rho, S);

  AdjointComparison c;
  c.n = p.geometry.side();
  c.lambda = p.lambda;
  c.rho = rho;
  for (std::size_t s = 0; s < S; ++s) {
    c.summation_vs_transpose = std::max(c.summation_vs_transpose, std::abs(sum[s] - tr[s]));
    c.polynomial_vs_exact = std::max(c.polynomial_vs_exact, std::abs(poly[s] - sum[s]));
    c.mass += nu[s] * sum[s];
  }
  c.polynomial_matches = c.polynomial_vs_exact < 1e-10;

  const auto coef = centered_monomial_coefficients(sum, N, rho);
  const auto pred = centered_monomial_coefficients(poly, N, rho);
  const double sd = std::sqrt(rho * (1 - rho));
  c.max_constant = std::abs(coef[0]);
  for (int x = 0; x < N; ++x) c.max_degree_one = std::max(c.max_degree_one, std::abs(coef[std::size_t{1} << x]) * sd);

  if (p.geometry.dim() == 1) {
    const int n = N;
    std::map<std::vector<int>, AdjointComparison::Shape> shapes;
    for (std::size_t a = 1; a < S; ++a) {
      if (std::abs(coef[a]) < 1e-10 && std::abs(pred[a]) < 1e-10) continue;
      std::vector<int> sites;
      for (int x = 0; x < n; ++x)
        if ((a >> x) & 1u) sites.push_back(x);
      std::vector<int> best;
      for (int r = 0; r < n; ++r) {
        std::vector<int> rot;
        for (int v : sites) rot.push_back((v - r + n) % n);
        std::sort(rot.begin(), rot.end());
        std::vector<int> off;
        for (int v : rot) off.push_back(v - rot.back());
        if (best.empty() || std::make_pair(-off.front(), off) < std::make_pair(-best.front(), best)) best = off;
      }
      auto& sh = shapes[best];
      sh.offsets = best;
      sh.coefficient = (sh.count == 0 || std::abs(coef[a]) > std::abs(sh.coefficient)) ? coef[a] : sh.coefficient;
      sh.predicted = pred[a];
      ++sh.count;
    }
    for (auto& [k, v] : shapes) c.shapes.push_back(v);
  }
  return c;
}

}  // namespace rdsim
