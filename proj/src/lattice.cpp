#include "rdsim/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace rdsim {

namespace {

int wrap(long long v, int n) {
  long long r = v % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

}  // namespace

TorusGeometry::TorusGeometry(int dim, int side) : dim_(dim), side_(side) {
  if (dim < 1) throw std::invalid_argument("torus dimension must be >= 1");
  if (side < 2) throw std::invalid_argument("torus side must be >= 2");
  double total = std::pow(static_cast<double>(side), dim);
  if (total > 4.0e9) throw std::invalid_argument("torus too large for 32-bit site indices");
  sites_ = 1;
  for (int j = 0; j < dim; ++j) sites_ *= static_cast<std::size_t>(side);
  stride_.assign(dim, 1);
  for (int j = dim - 2; j >= 0; --j) stride_[j] = stride_[j + 1] * side;

  auto table = std::make_shared<std::vector<Site>>(sites_ * 2 * dim);
  for (std::size_t x = 0; x < sites_; ++x) {
    for (int j = 0; j < dim; ++j) {
      int c = static_cast<int>((x / stride_[j]) % side);
      std::size_t base = x - c * stride_[j];
      (*table)[x * 2 * dim + 2 * j] = static_cast<Site>(base + ((c + 1) % side) * stride_[j]);
      (*table)[x * 2 * dim + 2 * j + 1] = static_cast<Site>(base + ((c + side - 1) % side) * stride_[j]);
    }
  }
  table_ = std::move(table);
}

std::vector<int> TorusGeometry::coords(Site x) const {
  std::vector<int> c(dim_);
  for (int j = 0; j < dim_; ++j) c[j] = static_cast<int>((x / stride_[j]) % side_);
  return c;
}

Site TorusGeometry::site_at(std::span<const int> coords) const {
  if (static_cast<int>(coords.size()) != dim_) throw std::invalid_argument("coordinate vector has wrong dimension");
  std::size_t s = 0;
  for (int j = 0; j < dim_; ++j) s += static_cast<std::size_t>(wrap(coords[j], side_)) * stride_[j];
  return static_cast<Site>(s);
}

Site TorusGeometry::shift(Site x, std::span<const int> offset) const {
  if (static_cast<int>(offset.size()) != dim_) throw std::invalid_argument("offset has wrong dimension");
  std::size_t s = 0;
  for (int j = 0; j < dim_; ++j) {
    long long c = static_cast<long long>((x / stride_[j]) % side_) + offset[j];
    s += static_cast<std::size_t>(wrap(c, side_)) * stride_[j];
  }
  return static_cast<Site>(s);
}

int TorusGeometry::distance(Site x, Site y) const {
  int best = 0;
  for (int j = 0; j < dim_; ++j) {
    int a = static_cast<int>((x / stride_[j]) % side_);
    int b = static_cast<int>((y / stride_[j]) % side_);
    int diff = std::abs(a - b);
    best = std::max(best, std::min(diff, side_ - diff));
  }
  return best;
}

TorusGeometry build_torus(int dim, int side) { return TorusGeometry(dim, side); }

Configuration::Configuration(TorusGeometry geometry)
    : geometry_(std::move(geometry)), words_((geometry_.site_count() + 63) / 64, 0) {}

Configuration::Configuration(TorusGeometry geometry, std::span<const std::uint8_t> occupancy)
    : Configuration(std::move(geometry)) {
  if (occupancy.size() != size()) throw std::invalid_argument("occupancy length does not match site count");
  for (std::size_t x = 0; x < occupancy.size(); ++x) {
    if (occupancy[x] > 1) throw std::invalid_argument("occupancy values must be 0 or 1");
    set(static_cast<Site>(x), occupancy[x] != 0);
  }
}

Configuration Configuration::from_index(const TorusGeometry& geometry, std::uint64_t index) {
  if (geometry.site_count() > 64) throw std::invalid_argument("state index needs at most 64 sites");
  if (geometry.site_count() < 64 && (index >> geometry.site_count()) != 0)
    throw std::invalid_argument("state index out of range");
  Configuration c(geometry);
  c.words_[0] = index;
  return c;
}

std::uint64_t Configuration::index() const {
  if (size() > 64) throw std::invalid_argument("state index needs at most 64 sites");
  return words_[0];
}

std::size_t Configuration::particle_count() const noexcept {
  std::size_t total = 0;
  for (auto w : words_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

std::size_t Configuration::hash() const noexcept {
  std::size_t h = std::hash<std::size_t>{}(size());
  for (auto w : words_) h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::vector<std::uint8_t> Configuration::to_vector() const {
  std::vector<std::uint8_t> v(size());
  for (std::size_t x = 0; x < v.size(); ++x) v[x] = occupied(static_cast<Site>(x)) ? 1 : 0;
  return v;
}

Configuration swap_sites(const Configuration& c, Site x, Site y) {
  Configuration out = c;
  out.swap(x, y);
  return out;
}

Configuration flip_site(const Configuration& c, Site x) {
  Configuration out = c;
  out.flip(x);
  return out;
}

OffsetSet::OffsetSet(int dim, std::vector<std::vector<int>> offsets) : dim_(dim), offsets_(std::move(offsets)) {
  if (dim < 1) throw std::invalid_argument("offset dimension must be >= 1");
  for (const auto& a : offsets_)
    if (static_cast<int>(a.size()) != dim) throw std::invalid_argument("offset has wrong dimension");
  std::sort(offsets_.begin(), offsets_.end());
  if (std::adjacent_find(offsets_.begin(), offsets_.end()) != offsets_.end())
    throw std::invalid_argument("offsets must be distinct");
}

bool OffsetSet::strictly_negative() const noexcept {
  for (const auto& a : offsets_)
    for (int v : a)
      if (v >= 0) return false;
  return true;
}

double centered_monomial(const Configuration& c, const OffsetSet& a, Site x, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("density must lie in (0,1)");
  double prod = 1.0;
  for (const auto& off : a.offsets()) prod *= c.value(c.geometry().shift(x, off)) - rho;
  return prod;
}

double bernoulli_weight(const Configuration& c, double rho) {
  std::size_t k = c.particle_count();
  return std::pow(rho, static_cast<double>(k)) * std::pow(1.0 - rho, static_cast<double>(c.size() - k));
}

SparsePartition sparse_partition(const TorusGeometry& g, int k) {
  const int n = g.side();
  if (k < 1) throw std::invalid_argument("sparseness radius must be >= 1");
  if (k > n) throw std::invalid_argument("sparseness radius exceeds torus side");

  // one dimensional classes: n = m k + r
  const int m = n / k, r = n % k;
  std::vector<std::vector<int>> line;
  for (int j = 0; j < k; ++j) {
    std::vector<int> cls;
    for (int i = 0; i < m; ++i) cls.push_back(j + i * k);
    line.push_back(std::move(cls));
  }
  for (int i = 0; i < r; ++i) line.push_back({m * k + i});

  SparsePartition out;
  out.k = k;
  const int d = g.dim();
  const std::size_t per_axis = line.size();
  std::size_t count = 1;
  for (int j = 0; j < d; ++j) count *= per_axis;

  std::vector<std::size_t> label(d, 0);
  for (std::size_t c = 0; c < count; ++c) {
    std::size_t rem = c;
    for (int j = d - 1; j >= 0; --j) {
      label[j] = rem % per_axis;
      rem /= per_axis;
    }
    std::vector<Site> cls;
    std::vector<std::size_t> pos(d, 0);
    std::vector<int> coords(d);
    while (true) {
      for (int j = 0; j < d; ++j) coords[j] = line[label[j]][pos[j]];
      cls.push_back(g.site_at(coords));
      int j = d - 1;
      while (j >= 0 && ++pos[j] == line[label[j]].size()) pos[j--] = 0;
      if (j < 0) break;
    }
    std::sort(cls.begin(), cls.end());
    out.classes.push_back(std::move(cls));
  }
  return out;
}

PartitionAudit audit_partition(const TorusGeometry& g, const SparsePartition& p) {
  PartitionAudit a;
  a.class_count = p.classes.size();
  std::vector<int> seen(g.site_count(), 0);
  bool disjoint = true;
  for (const auto& cls : p.classes)
    for (Site x : cls) {
      if (x >= g.site_count() || seen[x]++) disjoint = false;
    }
  a.disjoint = disjoint;
  a.covers = std::all_of(seen.begin(), seen.end(), [](int v) { return v >= 1; });
  bool sparse = true;
  for (const auto& cls : p.classes) {
    for (std::size_t i = 0; i < cls.size() && sparse; ++i)
      for (std::size_t j = i + 1; j < cls.size(); ++j)
        if (g.distance(cls[i], cls[j]) < p.k) {
          sparse = false;
          break;
        }
  }
  a.sparse = sparse;
  double bound = std::pow(2.0 * p.k - 1.0, g.dim());
  a.count_ok = static_cast<double>(a.class_count) <= bound;
  return a;
}

}  // namespace rdsim
