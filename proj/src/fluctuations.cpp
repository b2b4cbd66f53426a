#include "rdsim/fluctuations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rdsim {

namespace {

constexpr double kFourPi2 = 4 * std::numbers::pi * std::numbers::pi;

inline int wrap(int x, int n) { return x >= n ? x - n : (x < 0 ? x + n : x); }

void require_1d(const ModelParams& p, const char* what) {
  if (p.geometry.dim() != 1) throw std::invalid_argument(std::string(what) + " is defined for d = 1");
  if (p.geometry.side() < 3) throw std::invalid_argument(std::string(what) + " needs n >= 3");
}

}  // namespace

// ---- field observer ----

FieldObserver::FieldObserver(const ModelParams& p, std::vector<TestFunction> functions, const Configuration& initial,
                             double horizon, double sample_dt, bool full)
    : p_(p), n_(p.geometry.side()), inv_sqrt_n_(1.0 / std::sqrt(static_cast<double>(p.geometry.side()))),
      full_(full), occ_(initial.to_vector()), horizon_(horizon) {
  require_1d(p, "the field decomposition");
  check_horizon(horizon);
  if (!(sample_dt > 0)) throw std::invalid_argument("sample spacing must be > 0");
  if (functions.empty()) throw std::invalid_argument("at least one test function required");
  samples_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(horizon / sample_dt)));
  sample_dt_ = horizon / static_cast<double>(samples_);
  for (const auto& f : functions) {
    Track t;
    t.f = f.sample(n_);
    if (full_) t.dyn = dynkin_expansion(f, p_);
    tracks_.push_back(std::move(t));
    FieldTrajectory ft;
    ft.label = f.label();
    out_.push_back(std::move(ft));
  }
  recompute();
  record(0.0);
}

double FieldObserver::rate_c(int y) const noexcept {
  if (occ_[y]) return 1.0;
  return 1.0 + p_.lambda * (occ_[wrap(y - 1, n_)] & occ_[wrap(y + 1, n_)]);
}

void FieldObserver::local(int z, double sign) {
  const double nn = static_cast<double>(n_) * n_;
  double c[3];
  int ys[3];
  for (int i = 0; i < 3; ++i) {
    ys[i] = wrap(z - 1 + i, n_);
    c[i] = rate_c(ys[i]);
  }
  for (Track& t : tracks_) {
    const auto& f = t.f;
    double rc = 0, rq = 0, re = 0, rd = 0;
    for (int i = 0; i < 3; ++i) {
      const int y = ys[i];
      rc += c[i] * f[y] * (1 - 2 * occ_[y]);
      rq += c[i] * f[y] * f[y];
    }
    for (int i = 0; i < 2; ++i) {
      const int y = ys[i], y1 = ys[i + 1];
      const double d = static_cast<double>(occ_[y]) - occ_[y1];
      const double df = f[y1] - f[y];
      rc += nn * df * d;
      re += df * df * d * d;
    }
    for (int i = 0; i < 3; ++i) {
      const int x = wrap(z + i, n_);
      const double e0 = occ_[x] - t.dyn.rho, e1 = occ_[wrap(x - 1, n_)] - t.dyn.rho,
                   e2 = occ_[wrap(x - 2, n_)] - t.dyn.rho;
      rd += t.dyn.site_term(x, e2, e1, e0);
    }
    t.rate_comp += sign * rc * inv_sqrt_n_;
    t.rate_qr += sign * rq / n_;
    t.rate_qe += sign * re * n_;
    t.rate_drift += sign * rd * t.dyn.scale;
  }
}

void FieldObserver::recompute() {
  if (!full_) return;
  const double nn = static_cast<double>(n_) * n_;
  for (Track& t : tracks_) {
    const auto& f = t.f;
    double rc = 0, rq = 0, re = 0;
    for (int y = 0; y < n_; ++y) {
      const int y1 = wrap(y + 1, n_);
      const double c = rate_c(y);
      rc += c * f[y] * (1 - 2 * occ_[y]);
      rq += c * f[y] * f[y];
      const double d = static_cast<double>(occ_[y]) - occ_[y1];
      const double df = f[y1] - f[y];
      rc += nn * df * d;
      re += df * df * d * d;
    }
    t.rate_comp = rc * inv_sqrt_n_;
    t.rate_qr = rq / n_;
    t.rate_qe = re * n_;
    t.rate_drift = t.dyn.evaluate(std::span<const std::uint8_t>(occ_));
  }
}

void FieldObserver::advance(double t) {
  const double dt = t - clock_;
  if (full_)
    for (Track& k : tracks_) {
      k.comp += k.rate_comp * dt;
      k.drift += k.rate_drift * dt;
      k.qe += k.rate_qe * dt;
      k.qr += k.rate_qr * dt;
    }
  clock_ = t;
}

void FieldObserver::record(double t) {
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    Track& k = tracks_[i];
    FieldTrajectory& o = out_[i];
    double x = 0;
    for (int y = 0; y < n_; ++y) x += k.f[y] * (occ_[y] - p_.rho);
    x *= inv_sqrt_n_;
    if (next_sample_ == 0) k.field_at_start = x;
    o.times.push_back(t);
    o.field.push_back(x);
    if (full_) {
      const double m = k.jumps - k.comp;
      o.jumps.push_back(k.jumps);
      o.compensator.push_back(k.comp);
      o.martingale.push_back(m);
      o.drift.push_back(k.drift);
      o.qv_exclusion.push_back(k.qe);
      o.qv_reaction.push_back(k.qr);
      o.max_residual = std::max(o.max_residual, std::abs(x - k.field_at_start - m - k.drift));
    }
  }
  recompute();
  ++next_sample_;
}

void FieldObserver::flip(int z) {
  if (full_) local(z, -1.0);
  const double s = (1 - 2 * occ_[z]) * inv_sqrt_n_;
  for (Track& t : tracks_) t.jumps += t.f[z] * s;
  occ_[z] ^= 1;
  if (full_) local(z, +1.0);
}

void FieldObserver::on_event(const Event& e, const std::vector<std::uint8_t>&) {
  while (next_sample_ <= samples_) {
    const double ts = next_sample_ == samples_ ? horizon_ : sample_dt_ * static_cast<double>(next_sample_);
    if (!(ts < e.time)) break;
    advance(ts);
    record(ts);
  }
  advance(e.time);
  flip(static_cast<int>(e.site));
  if (e.kind == EventKind::Exchange) flip(static_cast<int>(e.other));
}

void FieldObserver::on_end(double, const std::vector<std::uint8_t>&) {
  while (next_sample_ <= samples_) {
    const double ts = next_sample_ == samples_ ? horizon_ : sample_dt_ * static_cast<double>(next_sample_);
    advance(ts);
    record(ts);
  }
}

FieldTrajectory martingale_decompose(const Trajectory& tr, const TestFunction& f, const ModelParams& p,
                                     double sample_dt) {
  FieldObserver obs(p, {f}, tr.initial, tr.horizon, sample_dt);
  replay(tr, obs);
  return std::move(obs.take()[0]);
}

QuadraticVariation predictable_qv(const Trajectory& tr, const TestFunction& f, const ModelParams& p,
                                  double sample_dt) {
  auto ft = martingale_decompose(tr, f, p, sample_dt);
  QuadraticVariation q;
  q.times = ft.times;
  q.exclusion = ft.qv_exclusion;
  q.reaction = ft.qv_reaction;
  for (std::size_t i = 0; i < ft.times.size(); ++i) q.total.push_back(ft.qv(i));
  return q;
}

// ---- static field statistics ----

double riemann_inner(const TestFunction& f, const TestFunction& g, int n) {
  double s = 0;
  for (int x = 0; x < n; ++x) s += f(static_cast<double>(x) / n) * g(static_cast<double>(x) / n);
  return s / n;
}

double continuum_inner(const TestFunction& f, const TestFunction& g) {
  const int m = 1 << 14;
  double s = 0;
  for (int i = 0; i < m; ++i) {
    const double u = (i + 0.5) / m;
    s += f(u) * g(u);
  }
  return s / m;
}

double field_variance_exact(const TestFunction& f, int n, double rho) {
  return rho * (1 - rho) * riemann_inner(f, f, n);
}

CovarianceReport initial_covariance_test(const TestFunction& f, const TestFunction& g, double rho, int n,
                                         std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("need at least 2 samples");
  if (!(rho > 0 && rho < 1)) throw std::invalid_argument("density must lie in (0,1)");
  const auto geo = build_torus(1, n);
  const auto fx = f.sample(n), gx = g.sample(n);
  std::vector<double> a(samples), b(samples);
  Rng rng(seed, 0);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < samples; ++i) {
    double xa = 0, xb = 0;
    for (int x = 0; x < n; ++x) {
      const double e = (rng.uniform() < rho ? 1.0 : 0.0) - rho;
      xa += fx[x] * e;
      xb += gx[x] * e;
    }
    a[i] = xa * s;
    b[i] = xb * s;
  }
  auto c = covariance_estimate(a, b);
  CovarianceReport r;
  r.empirical = c.mean;
  r.se = c.se;
  r.samples = samples;
  r.exact = rho * (1 - rho) * riemann_inner(f, g, n);
  r.continuum = rho * (1 - rho) * continuum_inner(f, g);
  return r;
}

// ---- ensembles ----

std::vector<std::vector<FieldTrajectory>> run_field_ensemble(const EnsembleSpec& spec) {
  require_1d(spec.params, "the field ensemble");
  check_horizon(spec.horizon);
  if (spec.burn_in < 0) throw std::invalid_argument("burn-in must be >= 0");
  std::vector<std::vector<FieldTrajectory>> out(spec.replicas);
  parallel_for(
      spec.replicas,
      [&](std::size_t r) {
        Rng init(spec.seed, 2 * r);
        auto c0 = sample_product_measure(spec.params.geometry, spec.params.rho, init);
        KmcEngine eng(spec.params, c0, Rng(spec.seed, 2 * r + 1));
        Event e;
        if (spec.burn_in > 0)
          while (eng.step(spec.burn_in, e)) {
          }
        FieldObserver obs(spec.params, spec.functions, eng.configuration(), spec.horizon, spec.sample_dt, spec.full);
        const double end = spec.burn_in + spec.horizon;
        while (eng.next(end, e)) {
          e.time -= spec.burn_in;
          obs.on_event(e, eng.occupancy());
          eng.apply(e);
        }
        obs.on_end(spec.horizon, eng.occupancy());
        out[r] = obs.take();
      },
      spec.threads);
  return out;
}

MartingaleReport martingale_report(const std::vector<std::vector<FieldTrajectory>>& ens) {
  if (ens.size() < 3) throw std::invalid_argument("need at least 3 replicas");
  const auto& first = ens[0].at(0);
  const std::size_t K = first.times.size() - 1;
  if (K % 2 != 0 || first.martingale.empty())
    throw std::invalid_argument("martingale report needs a full decomposition on an even sample grid");
  const std::size_t half = K / 2;
  std::vector<double> mT, nT, qT, xs, inc;
  MartingaleReport r;
  r.replicas = ens.size();
  r.horizon = first.times.back();
  for (const auto& rep : ens) {
    const auto& ft = rep.at(0);
    r.max_residual = std::max(r.max_residual, ft.max_residual);
    const double m = ft.martingale.back();
    mT.push_back(m);
    qT.push_back(ft.qv(K));
    nT.push_back(m * m - ft.qv(K));
    xs.push_back(ft.field[half]);
    inc.push_back(m - ft.martingale[half]);
  }
  r.m_final = mean_estimate(mT);
  r.n_final = mean_estimate(nT);
  r.qv_final = mean_estimate(qT);
  auto fit = linear_fit(xs, inc);
  r.increment_slope = fit.slope;
  r.increment_slope_se = fit.slope_se;
  return r;
}

QvReport qv_report(const std::vector<std::vector<FieldTrajectory>>& ens, const ModelParams& p, const TestFunction& f) {
  if (ens.size() < 2) throw std::invalid_argument("need at least 2 replicas");
  const int n = p.geometry.side();
  QvReport q;
  q.n = n;
  q.horizon = ens[0].at(0).times.back();
  std::vector<double> ex, re;
  for (const auto& rep : ens) {
    ex.push_back(rep.at(0).qv_exclusion.back() / q.horizon);
    re.push_back(rep.at(0).qv_reaction.back() / q.horizon);
  }
  q.exclusion_rate = mean_estimate(ex);
  q.reaction_rate = mean_estimate(re);
  const double v = 2 * p.rho * (1 - p.rho);
  double rs = 0, ds = 0, f2 = 0;
  const auto fx = f.sample(n);
  for (int x = 0; x < n; ++x) {
    const double d = f.derivative(static_cast<double>(x) / n);
    rs += d * d;
    const double df = fx[wrap(x + 1, n)] - fx[x];
    ds += df * df;
    f2 += fx[x] * fx[x];
  }
  q.exclusion_riemann = v * rs / n;
  q.exclusion_continuum = v * f.gradient_norm_sq();
  q.exclusion_discrete = v * n * ds;
  q.reaction_product = local_function_mean(LocalFunction::CenteredRate, p) * f2 / n;
  return q;
}

// ---- OU fit ----

std::array<double, 3> ou_drift_candidates(double lambda, double rho) {
  return {1 / (1 - rho) - lambda * rho * rho / (1 + lambda * rho * rho), 1 + lambda * (1 - rho),
          2 + lambda * rho * rho - 2 * lambda * rho * (1 - rho)};
}

OuFit ou_fit(const std::vector<std::vector<double>>& series, double h, int k, const ModelParams& p,
             std::size_t blocks) {
  if (k < 1) throw std::invalid_argument("mode index must be >= 1");
  if (series.size() < 2) throw std::invalid_argument("need at least 2 replicas");
  if (!(h > 0)) throw std::invalid_argument("sample spacing must be > 0");
  OuFit fit;
  fit.k = k;
  fit.replicas = series.size();
  const auto cand = ou_drift_candidates(p.lambda, p.rho);
  for (int i = 0; i < 3; ++i) fit.candidates[i] = kFourPi2 * k * k + cand[i];
  fit.theta_guess = fit.candidates[0];
  const std::size_t lo = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.05 / fit.theta_guess / h)));
  const std::size_t hi = static_cast<std::size_t>(std::floor(0.5 / fit.theta_guess / h));
  std::size_t len = series[0].size();
  for (const auto& s : series) len = std::min(len, s.size());
  if (hi < lo || hi - lo + 1 < 3 || hi + 1 >= len)
    throw std::domain_error("OU fit is ill-conditioned: lag grid too short for the sampled window");
  fit.lags = hi - lo + 1;

  const std::size_t R = series.size();
  const std::size_t B = std::max<std::size_t>(2, std::min(blocks, R));
  // sums[b][0] is lag 0, sums[b][1 + i] is lag lo + i
  std::vector<std::vector<double>> sums(B, std::vector<double>(fit.lags + 1, 0.0));
  std::vector<std::vector<double>> counts(B, std::vector<double>(fit.lags + 1, 0.0));
  for (std::size_t r = 0; r < R; ++r) {
    const std::size_t b = r * B / R;
    const auto& y = series[r];
    for (std::size_t j = 0; j <= fit.lags; ++j) {
      const std::size_t lag = j == 0 ? 0 : lo + j - 1;
      double s = 0;
      for (std::size_t t = 0; t + lag < len; ++t) s += y[t] * y[t + lag];
      sums[b][j] += s;
      counts[b][j] += static_cast<double>(len - lag);
    }
  }
  auto estimate = [&](std::size_t skip, double& intercept) {
    std::vector<double> total(fit.lags + 1, 0.0), cnt(fit.lags + 1, 0.0);
    for (std::size_t b = 0; b < B; ++b) {
      if (b == skip) continue;
      for (std::size_t j = 0; j <= fit.lags; ++j) {
        total[j] += sums[b][j];
        cnt[j] += counts[b][j];
      }
    }
    const double c0 = total[0] / cnt[0];
    std::vector<double> xs, ys;
    for (std::size_t j = 1; j <= fit.lags; ++j) {
      const double ratio = (total[j] / cnt[j]) / c0;
      if (!(ratio > 0)) throw std::domain_error("OU fit is ill-conditioned: nonpositive autocorrelation in lag grid");
      xs.push_back(static_cast<double>(lo + j - 1) * h);
      ys.push_back(std::log(ratio));
    }
    auto lf = linear_fit(xs, ys);
    intercept = lf.intercept;
    return -lf.slope;
  };
  fit.theta = estimate(B, fit.intercept);
  std::vector<double> loo;
  double dummy;
  for (std::size_t b = 0; b < B; ++b) loo.push_back(estimate(b, dummy));
  fit.se = jackknife_se(loo);
  return fit;
}

std::vector<OuFit> run_ou_experiment(const OuExperiment& ex) {
  if (ex.modes.empty()) throw std::invalid_argument("at least one mode required");
  const auto cand = ou_drift_candidates(ex.params.lambda, ex.params.rho);
  double theta_max = 0;
  EnsembleSpec spec{.params = ex.params, .functions = {}};
  for (int k : ex.modes) {
    spec.functions.push_back(TestFunction::cosine_mode(k));
    theta_max = std::max(theta_max, kFourPi2 * k * k + cand[0]);
  }
  spec.sample_dt = 0.0125 / theta_max;
  spec.horizon = spec.sample_dt * std::ceil(ex.horizon / spec.sample_dt);
  spec.burn_in = ex.burn_in;
  spec.replicas = ex.replicas;
  spec.seed = ex.seed;
  spec.full = false;
  spec.threads = ex.threads;
  auto ens = run_field_ensemble(spec);
  std::vector<OuFit> fits;
  for (std::size_t j = 0; j < ex.modes.size(); ++j) {
    std::vector<std::vector<double>> series;
    series.reserve(ens.size());
    for (auto& rep : ens) series.push_back(std::move(rep[j].field));
    fits.push_back(ou_fit(series, spec.horizon / static_cast<double>(series[0].size() - 1), ex.modes[j], ex.params));
  }
  return fits;
}

// ---- Boltzmann-Gibbs ----

BgObserver::BgObserver(const ModelParams& p, const TestFunction& phi, const OffsetSet& a0, const Configuration& initial)
    : n_(p.geometry.side()), rho_(p.rho), phi_(phi.sample(p.geometry.side())), occ_(initial.to_vector()) {
  if (p.geometry.dim() != 1) throw std::invalid_argument("the Boltzmann-Gibbs statistic is implemented for d = 1");
  if (a0.empty() || a0.dim() != 1 || !a0.strictly_negative())
    throw std::invalid_argument("A0 must be a nonempty set of strictly negative offsets in d = 1");
  for (const auto& a : a0.offsets()) {
    if (-a[0] >= n_) throw std::invalid_argument("offset does not fit in the torus");
    offsets_.push_back(a[0]);
  }
  for (int x = 0; x < n_; ++x) v_ += term(x);
}

double BgObserver::term(int x) const noexcept {
  double v = phi_[x] * (occ_[x] - rho_);
  for (int a : offsets_) v *= occ_[wrap(x + a, n_)] - rho_;
  return v;
}

void BgObserver::flip(int z) {
  int xs[16];
  int m = 0;
  auto add = [&](int x) {
    for (int i = 0; i < m; ++i)
      if (xs[i] == x) return;
    xs[m++] = x;
  };
  add(z);
  for (int a : offsets_)
    if (m < 16) add(wrap(z - a, n_));
  double before = 0, after = 0;
  for (int i = 0; i < m; ++i) before += term(xs[i]);
  occ_[z] ^= 1;
  for (int i = 0; i < m; ++i) after += term(xs[i]);
  v_ += after - before;
}

void BgObserver::on_event(const Event& e, const std::vector<std::uint8_t>&) {
  integral_ += v_ * (e.time - clock_) / std::sqrt(static_cast<double>(n_));
  clock_ = e.time;
  flip(static_cast<int>(e.site));
  if (e.kind == EventKind::Exchange) flip(static_cast<int>(e.other));
}

void BgObserver::on_end(double horizon, const std::vector<std::uint8_t>&) {
  integral_ += v_ * (horizon - clock_) / std::sqrt(static_cast<double>(n_));
  clock_ = horizon;
}

double bg_statistic(const Trajectory& tr, const TestFunction& phi, const OffsetSet& a0, double rho) {
  auto p = ModelParams::with_density(0.0, tr.initial.geometry(), rho);
  BgObserver obs(p, phi, a0, tr.initial);
  replay(tr, obs);
  return obs.value();
}

namespace {

LinearFit loglog_fit(const std::vector<double>& ns, const std::vector<double>& vals) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    lx.push_back(std::log(ns[i]));
    ly.push_back(std::log(std::max(vals[i], 1e-300)));
  }
  if (lx.size() >= 3) return linear_fit(lx, ly);
  LinearFit f;
  if (lx.size() == 2) {
    f.slope = (ly[1] - ly[0]) / (lx[1] - lx[0]);
    f.intercept = ly[0] - f.slope * lx[0];
  }
  return f;
}

}  // namespace

BgReport run_bg_experiment(const BgExperiment& ex) {
  BgReport rep;
  std::vector<double> ns, ms;
  for (int n : ex.ns) {
    auto g = build_torus(1, n);
    auto p = ex.rho < 0 ? ModelParams::stationary(ex.lambda, g) : ModelParams::with_density(ex.lambda, g, ex.rho);
    std::vector<double> vals(ex.replicas);
    parallel_for(
        ex.replicas,
        [&](std::size_t r) {
          Rng init(ex.seed ^ (static_cast<std::uint64_t>(n) << 40), 2 * r);
          auto c0 = sample_product_measure(g, p.rho, init);
          BgObserver obs(p, ex.phi, ex.a0, c0);
          run_ctmc(p, c0, ex.horizon, Rng(ex.seed ^ (static_cast<std::uint64_t>(n) << 40), 2 * r + 1), obs);
          vals[r] = obs.value();
        },
        ex.threads);
    std::vector<double> sq(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) sq[i] = vals[i] * vals[i];
    BgPoint pt;
    pt.n = n;
    pt.mean = mean_estimate(vals);
    pt.second_moment = mean_estimate(sq);
    rep.points.push_back(pt);
    ns.push_back(n);
    ms.push_back(pt.second_moment.mean);
  }
  rep.loglog = loglog_fit(ns, ms);
  rep.strictly_decreasing = true;
  for (std::size_t i = 1; i < rep.points.size(); ++i)
    rep.strictly_decreasing &= rep.points[i].second_moment.mean < rep.points[i - 1].second_moment.mean;
  if (rep.points.size() >= 2) {
    const auto& a = rep.points.front().second_moment;
    const auto& b = rep.points.back().second_moment;
    rep.separated = a.mean - 2 * a.se > b.mean + 2 * b.se;
  }
  return rep;
}

// ---- time-averaged local functions ----

double local_function_mean(LocalFunction psi, const ModelParams& p) {
  if (psi == LocalFunction::Zero) return 0.0;
  const double rho = p.rho;
  double m = 0;
  // sites x-1, x, x+1
  for (int s = 0; s < 8; ++s) {
    const int a = s & 1, b = (s >> 1) & 1, c = (s >> 2) & 1;
    const double w = (a ? rho : 1 - rho) * (b ? rho : 1 - rho) * (c ? rho : 1 - rho);
    double v;
    if (psi == LocalFunction::CenteredRate)
      v = b ? 1.0 : 1.0 + p.lambda * p.geometry.dim() * a * c;
    else
      v = static_cast<double>((c - b) * (c - b));
    m += w * v;
  }
  return m;
}

namespace {

class LocalAverageObserver {
 public:
  LocalAverageObserver(const ModelParams& p, const TestFunction& g, LocalFunction psi, double centering,
                       const Configuration& initial)
      : n_(p.geometry.side()), lambda_(p.lambda), psi_(psi), mu_(centering), g_(g.sample(p.geometry.side())),
        occ_(initial.to_vector()) {
    for (int x = 0; x < n_; ++x) s_ += term(x);
  }
  void on_event(const Event& e, const std::vector<std::uint8_t>&) {
    integral_ += s_ * (e.time - clock_) / n_;
    clock_ = e.time;
    flip(static_cast<int>(e.site));
    if (e.kind == EventKind::Exchange) flip(static_cast<int>(e.other));
  }
  void on_end(double horizon, const std::vector<std::uint8_t>&) {
    integral_ += s_ * (horizon - clock_) / n_;
    clock_ = horizon;
  }
  [[nodiscard]] double value() const noexcept { return integral_; }

 private:
  [[nodiscard]] double term(int x) const noexcept {
    switch (psi_) {
      case LocalFunction::Zero: return 0.0;
      case LocalFunction::CenteredRate: {
        double c = occ_[x] ? 1.0 : 1.0 + lambda_ * (occ_[wrap(x - 1, n_)] & occ_[wrap(x + 1, n_)]);
        return g_[x] * (c - mu_);
      }
      case LocalFunction::GradientSquared: {
        int d = occ_[wrap(x + 1, n_)] - occ_[x];
        return g_[x] * (d * d - mu_);
      }
    }
    return 0.0;
  }
  void flip(int z) {
    double before = 0, after = 0;
    for (int i = -1; i <= 1; ++i) before += term(wrap(z + i, n_));
    occ_[z] ^= 1;
    for (int i = -1; i <= 1; ++i) after += term(wrap(z + i, n_));
    s_ += after - before;
  }

  int n_;
  double lambda_;
  LocalFunction psi_;
  double mu_;
  std::vector<double> g_;
  std::vector<std::uint8_t> occ_;
  double s_ = 0, integral_ = 0, clock_ = 0;
};

}  // namespace

TimeAverageReport time_average_local_check(const TimeAverageExperiment& ex) {
  TimeAverageReport rep;
  rep.psi = ex.psi;
  std::vector<double> ns, ms;
  for (int n : ex.ns) {
    auto g = build_torus(1, n);
    auto p = ModelParams::stationary(ex.lambda, g);
    require_1d(p, "the time-averaged local check");
    rep.centering = local_function_mean(ex.psi, p);
    std::vector<double> vals(ex.replicas);
    parallel_for(
        ex.replicas,
        [&](std::size_t r) {
          const std::uint64_t seed = ex.seed ^ (static_cast<std::uint64_t>(n) << 40);
          Rng init(seed, 2 * r);
          auto c0 = sample_product_measure(g, p.rho, init);
          LocalAverageObserver obs(p, ex.weight, ex.psi, rep.centering, c0);
          run_ctmc(p, c0, ex.horizon, Rng(seed, 2 * r + 1), obs);
          vals[r] = std::abs(obs.value());
        },
        ex.threads);
    TimeAveragePoint pt;
    pt.n = n;
    pt.abs_value = mean_estimate(vals);
    rep.points.push_back(pt);
    ns.push_back(n);
    ms.push_back(pt.abs_value.mean);
  }
  if (ex.psi != LocalFunction::Zero) rep.loglog = loglog_fit(ns, ms);
  return rep;
}

}  // namespace rdsim
