#include "rdsim/kmc.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace rdsim {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x5eedu};
  engine_.seed(seq);
}

Configuration sample_product_measure(const TorusGeometry& g, double rho, Rng& rng) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("density must lie in [0,1]");
  Configuration c(g);
  for (Site x = 0; x < g.site_count(); ++x) c.set(x, rng.uniform() < rho);
  return c;
}

Configuration Trajectory::final_configuration() const {
  Configuration c = initial;
  for (const Event& e : events) {
    if (e.kind == EventKind::Exchange)
      c.swap(e.site, e.other);
    else
      c.flip(e.site);
  }
  return c;
}

bool Trajectory::valid() const {
  Configuration c = initial;
  const auto& g = c.geometry();
  double last = 0;
  bool first = true;
  for (const Event& e : events) {
    if (!(e.time >= 0 && e.time <= horizon)) return false;
    if (!first && !(e.time > last)) return false;
    first = false;
    last = e.time;
    if (e.site >= g.site_count() || e.other >= g.site_count()) return false;
    if (e.kind == EventKind::Exchange) {
      bool adjacent = false;
      for (int j = 0; j < g.dim(); ++j) adjacent |= g.neighbor(e.site, j, +1) == e.other;
      if (!adjacent || c.occupied(e.site) == c.occupied(e.other)) return false;
      c.swap(e.site, e.other);
    } else {
      if (e.other != e.site) return false;
      c.flip(e.site);
    }
  }
  return true;
}

KmcEngine::KmcEngine(const ModelParams& p, const Configuration& initial, Rng rng)
    : p_(p), rng_(rng), dim_(p.geometry.dim()), n2_(p.exchange_rate()), occ_(initial.to_vector()) {
  p_.validate();
  if (!(initial.geometry() == p.geometry)) throw std::invalid_argument("initial configuration geometry mismatch");
  const auto& g = p_.geometry;
  const std::size_t n_sites = g.site_count();
  edge_pos_.assign(n_sites * dim_, kNone);
  site_pos_.assign(n_sites, kNone);
  site_cls_.assign(n_sites, 0);
  classes_.resize(dim_ + 2);
  class_rate_.resize(dim_ + 2);
  class_rate_[0] = 1.0;
  for (int m = 0; m <= dim_; ++m) class_rate_[1 + m] = 1.0 + p_.lambda * m;
  if (!std::isfinite(n2_ * n_sites * dim_ + class_rate_.back() * n_sites)) throw std::overflow_error("total rate overflow");

  for (Site x = 0; x < n_sites; ++x) {
    for (int j = 0; j < dim_; ++j)
      if (occ_[x] != occ_[g.neighbor(x, j, +1)]) discordant_.insert(x * dim_ + j, edge_pos_);
    site_cls_[x] = static_cast<std::uint8_t>(site_class(x));
    classes_[site_cls_[x]].insert(x, site_pos_);
  }
}

double KmcEngine::total_rate() const noexcept {
  double r = n2_ * static_cast<double>(discordant_.items.size());
  for (std::size_t c = 0; c < classes_.size(); ++c) r += class_rate_[c] * static_cast<double>(classes_[c].items.size());
  return r;
}

Configuration KmcEngine::configuration() const { return Configuration(p_.geometry, occ_); }

int KmcEngine::site_class(Site x) const noexcept {
  if (occ_[x]) return 0;
  auto nb = p_.geometry.neighbors(x);
  int m = 0;
  for (int j = 0; j < dim_; ++j) m += occ_[nb[2 * j]] & occ_[nb[2 * j + 1]];
  return 1 + m;
}

void KmcEngine::toggle_edge(std::uint32_t e) {
  if (edge_pos_[e] == kNone)
    discordant_.insert(e, edge_pos_);
  else
    discordant_.erase(e, edge_pos_);
}

void KmcEngine::refresh_site(Site x) {
  int c = site_class(x);
  if (c == site_cls_[x]) return;
  classes_[site_cls_[x]].erase(x, site_pos_);
  site_cls_[x] = static_cast<std::uint8_t>(c);
  classes_[c].insert(x, site_pos_);
}

void KmcEngine::flip(Site x) {
  occ_[x] ^= 1;
  auto nb = p_.geometry.neighbors(x);
  for (int j = 0; j < dim_; ++j) {
    toggle_edge(x * dim_ + j);
    toggle_edge(nb[2 * j + 1] * dim_ + j);
  }
  refresh_site(x);
  for (Site y : nb) refresh_site(y);
}

bool KmcEngine::next(double horizon, Event& out) {
  const double rate = total_rate();
  const double dt = -std::log1p(-rng_.uniform()) / rate;
  if (!(time_ + dt <= horizon)) {
    time_ = horizon;
    return false;
  }
  double u = rng_.uniform() * rate;
  time_ += dt;
  out.time = time_;

  const double ex = n2_ * static_cast<double>(discordant_.items.size());
  if (u < ex) {
    std::size_t i = static_cast<std::size_t>(u / n2_);
    if (i >= discordant_.items.size()) i = discordant_.items.size() - 1;
    std::uint32_t e = discordant_.items[i];
    out.kind = EventKind::Exchange;
    out.site = e / dim_;
    out.other = p_.geometry.neighbor(out.site, static_cast<int>(e % dim_), +1);
    return true;
  }
  u -= ex;
  std::size_t c = 0;
  for (; c + 1 < classes_.size(); ++c) {
    double block = class_rate_[c] * static_cast<double>(classes_[c].items.size());
    if (u < block) break;
    u -= block;
  }
  while (classes_[c].items.empty()) --c;  // rounding at the top end
  std::size_t i = static_cast<std::size_t>(u / class_rate_[c]);
  if (i >= classes_[c].items.size()) i = classes_[c].items.size() - 1;
  out.kind = EventKind::Flip;
  out.site = classes_[c].items[i];
  out.other = out.site;
  return true;
}

void KmcEngine::apply(const Event& e) {
  flip(e.site);
  if (e.kind == EventKind::Exchange) flip(e.other);
}

void check_horizon(double horizon) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be finite and > 0");
}

void throw_event_overflow() { throw std::overflow_error("event count limit exceeded"); }

namespace {

struct Recorder {
  std::vector<Event>* events;
  void on_event(const Event& e, const std::vector<std::uint8_t>&) { events->push_back(e); }
  void on_end(double, const std::vector<std::uint8_t>&) {}
};

}  // namespace

Trajectory simulate_ctmc(const ModelParams& p, const Configuration& c0, double horizon, std::uint64_t seed,
                         std::uint64_t stream, SimulationLimits limits) {
  Trajectory tr{c0, {}, horizon};
  Recorder rec{&tr.events};
  run_ctmc(p, c0, horizon, Rng(seed, stream), rec, limits);
  return tr;
}

void write_event_log(std::ostream& out, const Trajectory& tr) {
  out << std::setprecision(17);
  for (const Event& e : tr.events) {
    out << e.time << (e.kind == EventKind::Exchange ? " X " : " F ") << e.site;
    if (e.kind == EventKind::Exchange) out << ' ' << e.other;
    out << '\n';
  }
}

}  // namespace rdsim
