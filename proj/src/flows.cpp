#include "rdsim/flows.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdsim {

namespace {

Rational frac(long num, long den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

void require_positive(int ell, const char* what) {
  if (ell < 1) throw std::invalid_argument(std::string(what) + " must be >= 1");
}

// Iterates over every point of a box in row-major order.
template <class F>
void for_each_point(const Box& b, F&& fn) {
  const int d = b.dim();
  if (b.volume() == 0) return;
  Point p = b.lo();
  for (std::size_t i = 0; i < b.volume(); ++i) {
    fn(static_cast<const Point&>(p), i);
    for (int j = d - 1; j >= 0; --j) {
      if (++p[j] < b.lo()[j] + b.extent()[j]) break;
      p[j] = b.lo()[j];
    }
  }
}

// Adds sign * phi_k, the shell flow U_[1,k]^d -> U_[1,k-1]^d translated by
// shift, into `into`.
void accumulate_shell(int k, int d, Flow& into, const Point& shift, int sign) {
  if (k < 2) throw std::invalid_argument("shell index must be >= 2");
  const Box shell = Box::cube(d, 1, k);
  const Box& tb = into.box();
  {
    Point lo(d), hi(d);
    for (int j = 0; j < d; ++j) {
      lo[j] = 1 + shift[j];
      hi[j] = k + shift[j];
    }
    if (!tb.contains(lo) || !tb.contains(hi)) throw std::invalid_argument("target flow box too small for shell");
  }

  std::vector<std::vector<std::size_t>> by_level(d + 1);
  for_each_point(shell, [&](const Point& p, std::size_t i) {
    int c = 0;
    for (int v : p) c += (v == k);
    if (c > 0) by_level[c].push_back(i);
  });

  Rational volume = 1;
  for (int j = 0; j < d; ++j) volume *= k;
  const Rational unit = 1 / volume;
  std::vector<Rational> mass(shell.volume());
  for (int c = 1; c <= d; ++c)
    for (std::size_t i : by_level[c]) mass[i] = unit;

  std::vector<Rational> weights(k - 1);
  for (int t = 0; t < k - 1; ++t) weights[t] = frac(k - 1 - t, k - 1);
  const Rational spread = frac(1, k - 1);

  Rational share, w;
  for (int level = d; level >= 1; --level) {
    for (std::size_t i : by_level[level]) {
      const Point x = shell.point(i);
      share = mass[i] / level;
      if (sign < 0) share = -share;
      Point xt(d);
      for (int j = 0; j < d; ++j) xt[j] = x[j] + shift[j];
      const std::size_t base_t = tb.index(xt);
      for (int axis = 0; axis < d; ++axis) {
        if (x[axis] != k) continue;
        const std::size_t st = tb.stride(axis), ss = shell.stride(axis);
        for (int t = 0; t < k - 1; ++t) {
          // edge (z, z + e_axis) with z = x - (t+1) e_axis
          w = share * weights[t];
          into.weight_at(axis, base_t - (t + 1) * st) -= w;
          if (level > 1) {
            Rational& m = mass[i - (t + 1) * ss];
            m += (sign < 0 ? -share : share) * spread;
          }
        }
      }
    }
  }
}

}  // namespace

Box::Box(Point lo, Point extent) : lo_(std::move(lo)), extent_(std::move(extent)) {
  if (lo_.size() != extent_.size() || lo_.empty()) throw std::invalid_argument("box corner and extent mismatch");
  const int d = static_cast<int>(lo_.size());
  stride_.assign(d, 1);
  for (int j = d - 2; j >= 0; --j) stride_[j] = stride_[j + 1] * static_cast<std::size_t>(extent_[j + 1]);
  volume_ = 1;
  for (int e : extent_) {
    if (e < 0) throw std::invalid_argument("negative box extent");
    volume_ *= static_cast<std::size_t>(e);
  }
}

Box Box::cube(int dim, int lo, int side) { return Box(Point(dim, lo), Point(dim, side)); }

bool Box::contains(const Point& p) const noexcept {
  if (static_cast<int>(p.size()) != dim()) return false;
  for (int j = 0; j < dim(); ++j)
    if (p[j] < lo_[j] || p[j] >= lo_[j] + extent_[j]) return false;
  return true;
}

std::size_t Box::index(const Point& p) const noexcept {
  std::size_t s = 0;
  for (int j = 0; j < dim(); ++j) s += static_cast<std::size_t>(p[j] - lo_[j]) * stride_[j];
  return s;
}

Point Box::point(std::size_t index) const {
  Point p(dim());
  for (int j = 0; j < dim(); ++j) {
    p[j] = lo_[j] + static_cast<int>(index / stride_[j]);
    index %= stride_[j];
  }
  return p;
}

Box Box::hull(const Box& other) const {
  if (other.dim() != dim()) throw std::invalid_argument("box dimension mismatch");
  Point lo(dim()), ext(dim());
  for (int j = 0; j < dim(); ++j) {
    lo[j] = std::min(lo_[j], other.lo_[j]);
    int hi = std::max(lo_[j] + extent_[j], other.lo_[j] + other.extent_[j]);
    ext[j] = hi - lo[j];
  }
  return Box(lo, ext);
}

Box Box::translated(const Point& shift) const {
  Point lo = lo_;
  for (int j = 0; j < dim(); ++j) lo[j] += shift[j];
  return Box(lo, extent_);
}

Measure::Measure(Box box) : box_(std::move(box)), mass_(box_.volume()) {}

Measure Measure::point_mass(const Point& at) {
  Measure m(Box(at, Point(at.size(), 1)));
  m.mass_[0] = 1;
  return m;
}

Measure Measure::uniform(const Box& box) {
  if (box.volume() == 0) throw std::invalid_argument("uniform measure on an empty box");
  Measure m(box);
  const Rational u = frac(1, static_cast<long>(box.volume()));
  std::fill(m.mass_.begin(), m.mass_.end(), u);
  return m;
}

Rational Measure::at(const Point& p) const { return box_.contains(p) ? mass_[box_.index(p)] : Rational(0); }

Rational Measure::total() const {
  Rational t = 0;
  for (const auto& v : mass_) t += v;
  return t;
}

bool Measure::nonnegative() const {
  return std::all_of(mass_.begin(), mass_.end(), [](const Rational& v) { return sgn(v) >= 0; });
}

Measure Measure::translated(const Point& shift) const {
  Measure m = *this;
  m.box_ = box_.translated(shift);
  return m;
}

Flow::Flow(Box box) : box_(std::move(box)), w_(box_.dim(), std::vector<Rational>(box_.volume())) {}

Rational Flow::weight(const Point& x, int axis) const {
  return box_.contains(x) ? w_[axis][box_.index(x)] : Rational(0);
}

void Flow::add(const Point& x, int axis, const Rational& v) {
  Point y = x;
  y[axis] += 1;
  if (!box_.contains(x) || !box_.contains(y)) throw std::invalid_argument("edge outside flow box");
  w_[axis][box_.index(x)] += v;
}

Rational Flow::outflow(const Point& x) const {
  Rational s = 0;
  for (int j = 0; j < dim(); ++j) {
    Point y = x;
    y[j] -= 1;
    s += weight(x, j);
    s -= weight(y, j);
  }
  return s;
}

Measure Flow::outflow_measure() const {
  Measure m(box_);
  for_each_point(box_, [&](const Point& p, std::size_t i) {
    Rational& s = m.at_index(i);
    for (int j = 0; j < dim(); ++j) {
      s += w_[j][i];
      if (p[j] > box_.lo()[j]) s -= w_[j][i - box_.stride(j)];
    }
  });
  return m;
}

std::size_t Flow::support_size() const {
  std::size_t c = 0;
  for (const auto& axis : w_)
    for (const auto& v : axis) c += (sgn(v) != 0);
  return c;
}

Rational Flow::max_abs_weight() const {
  Rational best = 0;
  for (const auto& axis : w_)
    for (const auto& v : axis)
      if (abs(v) > best) best = abs(v);
  return best;
}

bool Flow::supported_in(const Box& b) const {
  bool ok = true;
  for_each_edge([&](const Point& x, int j, const Rational&) {
    Point y = x;
    y[j] += 1;
    if (!b.contains(x) || !b.contains(y)) ok = false;
  });
  return ok;
}

Flow Flow::translated(const Point& shift) const {
  Flow f = *this;
  f.box_ = box_.translated(shift);
  return f;
}

Flow Flow::negated() const {
  Flow f = *this;
  for (auto& axis : f.w_)
    for (auto& v : axis) v = -v;
  return f;
}

Flow Flow::embedded(const Box& larger) const {
  Flow f(larger);
  for_each_edge([&](const Point& x, int j, const Rational& v) { f.add(x, j, v); });
  return f;
}

Flow operator+(const Flow& a, const Flow& b) {
  if (a.box().volume() == 0) return b;
  if (b.box().volume() == 0) return a;
  Flow out = a.embedded(a.box().hull(b.box()));
  b.for_each_edge([&](const Point& x, int j, const Rational& v) { out.add(x, j, v); });
  return out;
}

FlowCost flow_cost(const Flow& f) {
  FlowCost c;
  c.single = 0;
  for (int j = 0; j < f.dim(); ++j)
    for (std::size_t i = 0; i < f.box().volume(); ++i) {
      const Rational& v = f.weight_at(j, i);
      if (sgn(v) != 0) c.single += v * v;
    }
  c.ordered_pairs = 2 * c.single;
  return c;
}

DivergenceAudit audit_divergence(const Transport& t) {
  DivergenceAudit a;
  a.max_abs_residual = 0;
  const Measure out = t.flow.outflow_measure();
  Box hull = t.flow.box().hull(t.source.box()).hull(t.target.box());
  for_each_point(hull, [&](const Point& p, std::size_t) {
    Rational r = out.at(p) - (t.source.at(p) - t.target.at(p));
    if (sgn(r) != 0) {
      ++a.mismatches;
      if (abs(r) > a.max_abs_residual) a.max_abs_residual = abs(r);
    }
  });
  a.exact = a.mismatches == 0;
  return a;
}

Transport flow_1d(int ell) {
  require_positive(ell, "box size");
  Transport t{Flow(Box({0}, {ell + 1})), Measure::point_mass({0}), Measure::uniform(Box({1}, {ell}))};
  for (int k = 0; k < ell; ++k) t.flow.add({k}, 0, frac(ell - k, ell));
  return t;
}

Transport shell_flow(int k, int dim) {
  if (k < 2) throw std::invalid_argument("shell index must be >= 2");
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  Transport t{Flow(Box::cube(dim, 1, k)), Measure::uniform(Box::cube(dim, 1, k)),
              Measure::uniform(Box::cube(dim, 1, k - 1))};
  accumulate_shell(k, dim, t.flow, Point(dim, 0), +1);
  return t;
}

Transport box_flow(int ell, int dim) {
  require_positive(ell, "box size");
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (dim == 1) return flow_1d(ell);
  Transport t{Flow(Box::cube(dim, 1, ell)), Measure::point_mass(Point(dim, 1)),
              Measure::uniform(Box::cube(dim, 1, ell))};
  for (int k = 2; k <= ell; ++k) accumulate_shell(k, dim, t.flow, Point(dim, 0), -1);
  return t;
}

Transport box_flow_zero_anchored(int ell, int dim) {
  require_positive(ell, "box size");
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  Transport t{Flow(Box::cube(dim, 0, ell)), Measure::point_mass(Point(dim, 0)),
              Measure::uniform(Box::cube(dim, 0, ell))};
  for (int k = 2; k <= ell; ++k) accumulate_shell(k, dim, t.flow, Point(dim, -1), -1);
  return t;
}

Kernel uniform_kernel(int ell, int dim) {
  require_positive(ell, "box size");
  return Measure::uniform(Box::cube(dim, 0, ell));
}

Measure convolve(const Measure& a, const Measure& b) {
  const int d = a.box().dim();
  if (b.box().dim() != d) throw std::invalid_argument("measure dimension mismatch");
  Point lo(d), ext(d);
  for (int j = 0; j < d; ++j) {
    lo[j] = a.box().lo()[j] + b.box().lo()[j];
    ext[j] = a.box().extent()[j] + b.box().extent()[j] - 1;
  }
  Measure out{Box(lo, ext)};
  for_each_point(a.box(), [&](const Point& x, std::size_t i) {
    const Rational& ax = a.at_index(i);
    if (sgn(ax) == 0) return;
    for_each_point(b.box(), [&](const Point& y, std::size_t k) {
      const Rational& by = b.at_index(k);
      if (sgn(by) == 0) return;
      Point z(d);
      for (int j = 0; j < d; ++j) z[j] = x[j] + y[j];
      out.at_index(out.box().index(z)) += ax * by;
    });
  });
  return out;
}

Kernel pyramid_kernel(int ell, int dim) {
  require_positive(ell, "box size");
  const Measure line = convolve(uniform_kernel(ell, 1), uniform_kernel(ell, 1));
  Measure q{Box::cube(dim, 0, 2 * ell - 1)};
  for_each_point(q.box(), [&](const Point& p, std::size_t i) {
    Rational v = 1;
    for (int c : p) v *= line.at_index(static_cast<std::size_t>(c));
    q.at_index(i) = v;
  });
  return q;
}

Flow convolve(const Flow& phi, const Measure& p) {
  const int d = phi.dim();
  if (p.box().dim() != d) throw std::invalid_argument("flow and kernel dimension mismatch");
  Point lo(d), ext(d);
  for (int j = 0; j < d; ++j) {
    lo[j] = phi.box().lo()[j] + p.box().lo()[j];
    ext[j] = phi.box().extent()[j] + p.box().extent()[j] - 1;
  }
  Flow out{Box(lo, ext)};
  phi.for_each_edge([&](const Point& x, int axis, const Rational& v) {
    for_each_point(p.box(), [&](const Point& y, std::size_t k) {
      const Rational& py = p.at_index(k);
      if (sgn(py) == 0) return;
      Point z(d);
      for (int j = 0; j < d; ++j) z[j] = x[j] + y[j];
      out.weight_at(axis, out.box().index(z)) += py * v;
    });
  });
  return out;
}

Flow box_average(const Flow& phi, int ell) {
  require_positive(ell, "box size");
  const int d = phi.dim();
  Point ext = phi.box().extent();
  for (int j = 0; j < d; ++j) ext[j] += ell - 1;
  Flow out{Box(phi.box().lo(), ext)};
  const Box& ob = out.box();
  std::vector<Rational> line;
  Rational acc;
  for (int axis = 0; axis < d; ++axis) {
    phi.for_each_edge([&](const Point& x, int j, const Rational& v) {
      if (j == axis) out.weight_at(axis, ob.index(x)) = v;
    });
    // running window sums along each direction
    for (int i = 0; i < d; ++i) {
      const std::size_t len = static_cast<std::size_t>(ob.extent()[i]);
      const std::size_t st = ob.stride(i);
      line.resize(len);
      for (std::size_t base = 0; base < ob.volume(); ++base) {
        if ((base / st) % len != 0) continue;
        for (std::size_t t = 0; t < len; ++t) line[t] = out.weight_at(axis, base + t * st);
        acc = 0;
        for (std::size_t t = 0; t < len; ++t) {
          acc += line[t];
          if (t >= static_cast<std::size_t>(ell)) acc -= line[t - ell];
          out.weight_at(axis, base + t * st) = acc;
        }
      }
    }
  }
  Rational scale = 1;
  for (int j = 0; j < d; ++j) scale *= ell;
  scale = 1 / scale;
  for (int axis = 0; axis < d; ++axis)
    for (std::size_t i = 0; i < ob.volume(); ++i)
      if (sgn(out.weight_at(axis, i)) != 0) out.weight_at(axis, i) *= scale;
  return out;
}

Transport pyramid_flow(int ell, int dim) {
  require_positive(ell, "box size");
  Transport phi = box_flow_zero_anchored(ell, dim);
  Flow psi = phi.flow + box_average(phi.flow, ell);
  return Transport{std::move(psi), Measure::point_mass(Point(dim, 0)), pyramid_kernel(ell, dim)};
}

double g_d(double ell, int dim) {
  if (dim == 1) return ell;
  if (dim == 2) return std::log(ell);
  return 1.0;
}

TelescopeChecker::TelescopeChecker(int ell, int dim) : ell_(ell), dim_(dim), psi_(pyramid_flow(ell, dim)) {}

Rational TelescopeChecker::residual(const Configuration& c, Site x, double rho) const {
  const auto& g = c.geometry();
  if (g.dim() != dim_) throw std::invalid_argument("configuration dimension does not match checker");
  if (g.side() <= 2 * ell_ + 1) throw std::invalid_argument("torus too small for the pyramid support");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("density must lie in (0,1)");
  const Rational r(rho);
  const Rational up = 1 - r, down = -r;
  auto bar = [&](Site s) -> const Rational& { return c.occupied(s) ? up : down; };

  Rational res = bar(x);
  const Measure& q = psi_.target;
  for_each_point(q.box(), [&](const Point& y, std::size_t i) {
    const Rational& w = q.at_index(i);
    if (sgn(w) != 0) res -= w * bar(g.shift(x, y));
  });
  psi_.flow.for_each_edge([&](const Point& y, int j, const Rational& w) {
    Site a = g.shift(x, y);
    Site b = g.neighbor(a, j, +1);
    res -= w * (bar(a) - bar(b));
  });
  return res;
}

Rational telescope_check(const Configuration& c, Site x, int ell, double rho) {
  return TelescopeChecker(ell, c.geometry().dim()).residual(c, x, rho);
}

CostRow box_flow_cost_row(int ell, int dim, bool verify) {
  Transport t = box_flow(ell, dim);
  CostRow row;
  row.dim = dim;
  row.ell = ell;
  row.cost = flow_cost(t.flow).value();
  row.g = g_d(ell, dim);
  row.ratio = row.g > 0 ? row.cost / row.g : std::nan("");
  row.divergence_exact = verify ? audit_divergence(t).exact : false;
  return row;
}

int replacement_box_side(int n, int dim) {
  if (n < 2 || dim < 1) throw std::invalid_argument("invalid torus for the replacement box");
  double ell;
  if (dim == 1)
    ell = n;
  else if (dim == 2)
    ell = n / std::sqrt(std::log(static_cast<double>(n)));
  else
    ell = std::pow(static_cast<double>(n), 2.0 / dim);
  return std::clamp(static_cast<int>(std::floor(ell + 1e-9)), 1, n);
}

bool replacement_box_admissible(int ell, int n, int dim) {
  if (ell < 1 || ell > n) return false;
  Rational lhs = flow_cost(box_flow(ell, dim).flow).single;
  for (int j = 0; j < dim; ++j) lhs *= ell;
  return lhs <= Rational(static_cast<long>(n) * n);
}

}  // namespace rdsim
