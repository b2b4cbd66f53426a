#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "rdsim/dynamics.hpp"

namespace rdsim {

enum class EventKind : std::uint8_t { Exchange = 0, Flip = 1 };

// Exchange: swap of site and other = site + e_axis.  Flip: other == site.
struct Event {
  double time = 0;
  Site site = 0;
  Site other = 0;
  EventKind kind = EventKind::Flip;
};

struct Trajectory {
  Configuration initial;
  std::vector<Event> events;
  double horizon = 0;

  [[nodiscard]] Configuration final_configuration() const;
  // Times strictly increasing in [0, horizon]; exchanges across
  // discordant neighboring pairs only.
  [[nodiscard]] bool valid() const;
};

// Random stream keyed by (seed, stream index).
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t bits() { return engine_(); }
  // uniform on [0,1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

[[nodiscard]] Configuration sample_product_measure(const TorusGeometry& g, double rho, Rng& rng);

// Rejection-free direct-method simulation over aggregated rate classes:
// discordant edges (rate n^2), occupied sites (rate 1) and empty sites
// bucketed by the count m of occupied opposite-neighbor pairs (rate 1 + lambda m).
class KmcEngine {
 public:
  KmcEngine(const ModelParams& p, const Configuration& initial, Rng rng);

  [[nodiscard]] double time() const noexcept { return time_; }
  [[nodiscard]] double total_rate() const noexcept;
  [[nodiscard]] const std::vector<std::uint8_t>& occupancy() const noexcept { return occ_; }
  [[nodiscard]] Configuration configuration() const;
  [[nodiscard]] const ModelParams& params() const noexcept { return p_; }

  // Samples the next event and advances the clock to it without changing
  // the configuration.  If it falls beyond horizon the clock stops at
  // horizon and false is returned.
  bool next(double horizon, Event& out);
  void apply(const Event& e);
  bool step(double horizon, Event& out) {
    if (!next(horizon, out)) return false;
    apply(out);
    return true;
  }

 private:
  struct IndexedSet {
    std::vector<std::uint32_t> items;
    void insert(std::uint32_t v, std::vector<std::uint32_t>& pos) {
      pos[v] = static_cast<std::uint32_t>(items.size());
      items.push_back(v);
    }
    void erase(std::uint32_t v, std::vector<std::uint32_t>& pos) {
      std::uint32_t i = pos[v], last = items.back();
      items[i] = last;
      pos[last] = i;
      items.pop_back();
      pos[v] = kNone;
    }
  };
  static constexpr std::uint32_t kNone = 0xffffffffu;

  void toggle_edge(std::uint32_t e);
  [[nodiscard]] int site_class(Site x) const noexcept;
  void refresh_site(Site x);
  void flip(Site x);

  ModelParams p_;
  Rng rng_;
  int dim_;
  double n2_;
  double time_ = 0;
  std::vector<std::uint8_t> occ_;
  IndexedSet discordant_;
  std::vector<std::uint32_t> edge_pos_;
  std::vector<IndexedSet> classes_;  // 0: occupied, 1 + m: empty with m pairs
  std::vector<std::uint32_t> site_pos_;
  std::vector<std::uint8_t> site_cls_;
  std::vector<double> class_rate_;
};

struct SimulationLimits {
  std::size_t max_events = 2'000'000'000;
};

[[nodiscard]] Trajectory simulate_ctmc(const ModelParams& p, const Configuration& c0, double horizon,
                                       std::uint64_t seed, std::uint64_t stream = 0, SimulationLimits limits = {});

// Streams events to obs.on_event(event, occupancy_before) and finally
// obs.on_end(horizon, occupancy) without storing the trajectory.
template <class Observer>
void run_ctmc(const ModelParams& p, const Configuration& c0, double horizon, Rng rng, Observer& obs,
              SimulationLimits limits = {});

// Replays a stored trajectory through the same observer interface.
template <class Observer>
void replay(const Trajectory& tr, Observer& obs);

void write_event_log(std::ostream& out, const Trajectory& tr);

void check_horizon(double horizon);
[[noreturn]] void throw_event_overflow();

template <class Observer>
void run_ctmc(const ModelParams& p, const Configuration& c0, double horizon, Rng rng, Observer& obs,
              SimulationLimits limits) {
  check_horizon(horizon);
  KmcEngine engine(p, c0, rng);
  Event e;
  std::size_t count = 0;
  while (engine.next(horizon, e)) {
    if (++count > limits.max_events) throw_event_overflow();
    obs.on_event(e, engine.occupancy());
    engine.apply(e);
  }
  obs.on_end(horizon, engine.occupancy());
}

template <class Observer>
void replay(const Trajectory& tr, Observer& obs) {
  std::vector<std::uint8_t> occ = tr.initial.to_vector();
  for (const Event& e : tr.events) {
    obs.on_event(e, static_cast<const std::vector<std::uint8_t>&>(occ));
    occ[e.site] ^= 1;
    if (e.kind == EventKind::Exchange) occ[e.other] ^= 1;
  }
  obs.on_end(tr.horizon, static_cast<const std::vector<std::uint8_t>&>(occ));
}

}  // namespace rdsim
