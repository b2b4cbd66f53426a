#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <vector>

#include "rdsim/lattice.hpp"

namespace rdsim {

using Rational = mpq_class;
using Point = std::vector<int>;

// Integer box prod_j [lo_j, lo_j + extent_j), points in row-major order.
class Box {
 public:
  Box() = default;
  Box(Point lo, Point extent);
  static Box cube(int dim, int lo, int side);

  [[nodiscard]] int dim() const noexcept { return static_cast<int>(lo_.size()); }
  [[nodiscard]] const Point& lo() const noexcept { return lo_; }
  [[nodiscard]] const Point& extent() const noexcept { return extent_; }
  [[nodiscard]] std::size_t volume() const noexcept { return volume_; }
  [[nodiscard]] std::size_t stride(int axis) const noexcept { return stride_[axis]; }
  [[nodiscard]] bool contains(const Point& p) const noexcept;
  [[nodiscard]] std::size_t index(const Point& p) const noexcept;
  [[nodiscard]] Point point(std::size_t index) const;
  [[nodiscard]] Box hull(const Box& other) const;
  [[nodiscard]] Box translated(const Point& shift) const;

  bool operator==(const Box& o) const noexcept { return lo_ == o.lo_ && extent_ == o.extent_; }

 private:
  Point lo_;
  Point extent_;
  std::vector<std::size_t> stride_;
  std::size_t volume_ = 0;
};

// Finitely supported rational measure on Z^d, dense over its box.
class Measure {
 public:
  Measure() = default;
  explicit Measure(Box box);
  static Measure point_mass(const Point& at);
  static Measure uniform(const Box& box);

  [[nodiscard]] const Box& box() const noexcept { return box_; }
  [[nodiscard]] Rational at(const Point& p) const;
  [[nodiscard]] const Rational& at_index(std::size_t i) const { return mass_[i]; }
  Rational& at_index(std::size_t i) { return mass_[i]; }
  [[nodiscard]] Rational total() const;
  [[nodiscard]] bool nonnegative() const;
  [[nodiscard]] Measure translated(const Point& shift) const;

 private:
  Box box_;
  std::vector<Rational> mass_;
};

// Probability kernels on Z^d.
using Kernel = Measure;

// Flow on nearest-neighbor edges, stored by positive orientation:
// weight(x, j) = phi(x, x + e_j) = -phi(x + e_j, x).  phi(x, y) is the mass
// sent from x to y.
class Flow {
 public:
  Flow() = default;
  explicit Flow(Box box);

  [[nodiscard]] int dim() const noexcept { return box_.dim(); }
  [[nodiscard]] const Box& box() const noexcept { return box_; }
  [[nodiscard]] Rational weight(const Point& x, int axis) const;
  [[nodiscard]] const Rational& weight_at(int axis, std::size_t index) const { return w_[axis][index]; }
  Rational& weight_at(int axis, std::size_t index) { return w_[axis][index]; }
  // Both x and x + e_axis must lie in the box.
  void add(const Point& x, int axis, const Rational& v);

  // sum_y phi(x, y)
  [[nodiscard]] Rational outflow(const Point& x) const;
  [[nodiscard]] Measure outflow_measure() const;

  [[nodiscard]] std::size_t support_size() const;
  [[nodiscard]] Rational max_abs_weight() const;
  // True if every nonzero edge has both endpoints in b.
  [[nodiscard]] bool supported_in(const Box& b) const;

  [[nodiscard]] Flow translated(const Point& shift) const;
  [[nodiscard]] Flow negated() const;
  [[nodiscard]] Flow embedded(const Box& larger) const;

  template <class F>
  void for_each_edge(F&& fn) const {
    for (int j = 0; j < dim(); ++j)
      for (std::size_t i = 0; i < box_.volume(); ++i)
        if (sgn(w_[j][i]) != 0) fn(box_.point(i), j, w_[j][i]);
  }

 private:
  Box box_;
  std::vector<std::vector<Rational>> w_;
};

[[nodiscard]] Flow operator+(const Flow& a, const Flow& b);

struct FlowCost {
  Rational single;         // sum over positively oriented edges of phi^2
  Rational ordered_pairs;  // sum over ordered pairs (x,y), twice the above
  [[nodiscard]] double value() const { return single.get_d(); }
};

[[nodiscard]] FlowCost flow_cost(const Flow& f);

// A flow together with the measures it claims to connect.
struct Transport {
  Flow flow;
  Measure source;
  Measure target;
};

struct DivergenceAudit {
  bool exact = false;
  std::size_t mismatches = 0;
  Rational max_abs_residual;
};

// Checks sum_y phi(x, y) = source(x) - target(x) at every point.
[[nodiscard]] DivergenceAudit audit_divergence(const Transport& t);

[[nodiscard]] Transport flow_1d(int ell);
[[nodiscard]] Transport shell_flow(int k, int dim);
[[nodiscard]] Transport box_flow(int ell, int dim);
[[nodiscard]] Transport box_flow_zero_anchored(int ell, int dim);

[[nodiscard]] Kernel uniform_kernel(int ell, int dim);
[[nodiscard]] Kernel pyramid_kernel(int ell, int dim);
[[nodiscard]] Measure convolve(const Measure& a, const Measure& b);
// (p * phi)(x, x+e) = sum_y p(y) phi(x-y, x-y+e), by direct summation.
[[nodiscard]] Flow convolve(const Flow& phi, const Measure& p);
// Same as convolve(phi, uniform_kernel(ell, d)) using running sums.
[[nodiscard]] Flow box_average(const Flow& phi, int ell);

[[nodiscard]] Transport pyramid_flow(int ell, int dim);

// g_d(l): l for d = 1, log l for d = 2, 1 for d >= 3.
[[nodiscard]] double g_d(double ell, int dim);

class TelescopeChecker {
 public:
  TelescopeChecker(int ell, int dim);
  [[nodiscard]] int ell() const noexcept { return ell_; }
  [[nodiscard]] const Transport& pyramid() const noexcept { return psi_; }
  // eta_bar_x - (eta_bar * q)_x - sum_j sum_y psi(y, y+e_j)(eta_bar_{x+y} - eta_bar_{x+y+e_j})
  [[nodiscard]] Rational residual(const Configuration& c, Site x, double rho) const;

 private:
  int ell_;
  int dim_;
  Transport psi_;
};

[[nodiscard]] Rational telescope_check(const Configuration& c, Site x, int ell, double rho);

struct CostRow {
  int dim = 0;
  int ell = 0;
  double cost = 0;
  double g = 0;
  double ratio = 0;
  bool divergence_exact = false;
};

[[nodiscard]] CostRow box_flow_cost_row(int ell, int dim, bool verify);

// Box side used for the static replacement: l = n (d=1), n/sqrt(log n)
// (d=2), n^(2/d) (d>=3), clipped to [1, n].
[[nodiscard]] int replacement_box_side(int n, int dim);
// l^d * cost(box flow) <= n^2
[[nodiscard]] bool replacement_box_admissible(int ell, int n, int dim);

}  // namespace rdsim
