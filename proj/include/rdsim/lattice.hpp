#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace rdsim {

using Site = std::uint32_t;

// Discrete torus (Z / nZ)^d with row-major site order: the last coordinate
// varies fastest.  Copies share one immutable neighbor table.
class TorusGeometry {
 public:
  TorusGeometry(int dim, int side);

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] int side() const noexcept { return side_; }
  [[nodiscard]] std::size_t site_count() const noexcept { return sites_; }

  // Neighbor of x one step along axis in direction dir (+1 or -1).
  [[nodiscard]] Site neighbor(Site x, int axis, int dir) const noexcept {
    return (*table_)[static_cast<std::size_t>(x) * 2 * dim_ + 2 * axis + (dir > 0 ? 0 : 1)];
  }
  // The 2d neighbors of x ordered (+e_0, -e_0, +e_1, -e_1, ...).
  [[nodiscard]] std::span<const Site> neighbors(Site x) const noexcept {
    return {table_->data() + static_cast<std::size_t>(x) * 2 * dim_, static_cast<std::size_t>(2 * dim_)};
  }

  [[nodiscard]] std::vector<int> coords(Site x) const;
  // Coordinates are reduced mod n, so any integer vector is accepted.
  [[nodiscard]] Site site_at(std::span<const int> coords) const;
  [[nodiscard]] Site shift(Site x, std::span<const int> offset) const;
  // Wrap-around L-infinity distance.
  [[nodiscard]] int distance(Site x, Site y) const;

  bool operator==(const TorusGeometry& other) const noexcept {
    return dim_ == other.dim_ && side_ == other.side_;
  }

 private:
  int dim_;
  int side_;
  std::size_t sites_;
  std::vector<std::size_t> stride_;
  std::shared_ptr<const std::vector<Site>> table_;
};

TorusGeometry build_torus(int dim, int side);

// Occupancy configuration, bit-packed.
class Configuration {
 public:
  explicit Configuration(TorusGeometry geometry);
  Configuration(TorusGeometry geometry, std::span<const std::uint8_t> occupancy);

  // States of tori with at most 64 sites are indexed by the integer whose
  // bit x is the occupation of site x.
  static Configuration from_index(const TorusGeometry& geometry, std::uint64_t index);
  [[nodiscard]] std::uint64_t index() const;

  [[nodiscard]] const TorusGeometry& geometry() const noexcept { return geometry_; }
  [[nodiscard]] std::size_t size() const noexcept { return geometry_.site_count(); }

  [[nodiscard]] bool occupied(Site x) const noexcept { return (words_[x >> 6] >> (x & 63)) & 1u; }
  [[nodiscard]] int value(Site x) const noexcept { return occupied(x) ? 1 : 0; }
  void set(Site x, bool v) noexcept {
    const std::uint64_t bit = std::uint64_t{1} << (x & 63);
    if (v) words_[x >> 6] |= bit; else words_[x >> 6] &= ~bit;
  }
  void flip(Site x) noexcept { words_[x >> 6] ^= std::uint64_t{1} << (x & 63); }
  void swap(Site x, Site y) noexcept {
    const bool a = occupied(x), b = occupied(y);
    set(x, b);
    set(y, a);
  }

  [[nodiscard]] std::size_t particle_count() const noexcept;
  [[nodiscard]] std::size_t hash() const noexcept;
  [[nodiscard]] std::vector<std::uint8_t> to_vector() const;

  bool operator==(const Configuration& other) const noexcept {
    return geometry_ == other.geometry_ && words_ == other.words_;
  }

 private:
  TorusGeometry geometry_;
  std::vector<std::uint64_t> words_;
};

[[nodiscard]] Configuration swap_sites(const Configuration& c, Site x, Site y);
[[nodiscard]] Configuration flip_site(const Configuration& c, Site x);

// Finite set of relative offsets in Z^d.
class OffsetSet {
 public:
  OffsetSet() = default;
  OffsetSet(int dim, std::vector<std::vector<int>> offsets);

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return offsets_.size(); }
  [[nodiscard]] bool empty() const noexcept { return offsets_.empty(); }
  [[nodiscard]] const std::vector<std::vector<int>>& offsets() const noexcept { return offsets_; }
  [[nodiscard]] bool strictly_negative() const noexcept;

 private:
  int dim_ = 0;
  std::vector<std::vector<int>> offsets_;
};

// prod_{a in A} (eta_{x+a} - rho); 1 for empty A.
[[nodiscard]] double centered_monomial(const Configuration& c, const OffsetSet& a, Site x, double rho);

// Bernoulli product weight of a configuration.
[[nodiscard]] double bernoulli_weight(const Configuration& c, double rho);

struct SparsePartition {
  int k = 1;
  std::vector<std::vector<Site>> classes;
};

[[nodiscard]] SparsePartition sparse_partition(const TorusGeometry& g, int k);

struct PartitionAudit {
  bool covers = false;
  bool disjoint = false;
  bool sparse = false;
  bool count_ok = false;
  std::size_t class_count = 0;
  [[nodiscard]] bool ok() const noexcept { return covers && disjoint && sparse && count_ok; }
};

[[nodiscard]] PartitionAudit audit_partition(const TorusGeometry& g, const SparsePartition& p);

}  // namespace rdsim
