#include "rdsim/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rdsim {

// ---- test functions ----

TestFunction TestFunction::cosine_mode(int k) {
  if (k < 1) throw std::invalid_argument("Fourier mode index must be >= 1");
  TestFunction f;
  f.kind_ = Kind::Cosine;
  f.k_ = k;
  return f;
}

TestFunction TestFunction::sine_mode(int k) {
  if (k < 1) throw std::invalid_argument("Fourier mode index must be >= 1");
  TestFunction f;
  f.kind_ = Kind::Sine;
  f.k_ = k;
  return f;
}

TestFunction TestFunction::constant(double c) {
  TestFunction f;
  f.kind_ = Kind::Constant;
  f.c_ = c;
  return f;
}

TestFunction TestFunction::tabulated(std::vector<double> f, std::vector<double> df, std::vector<double> d2f) {
  if (f.size() < 4 || f.size() != df.size() || f.size() != d2f.size())
    throw std::invalid_argument("tabulated test function needs equal-length tables of at least 4 points");
  TestFunction t;
  t.kind_ = Kind::Tabulated;
  t.f_ = std::make_shared<const std::vector<double>>(std::move(f));
  t.df_ = std::make_shared<const std::vector<double>>(std::move(df));
  t.d2f_ = std::make_shared<const std::vector<double>>(std::move(d2f));
  return t;
}

std::string TestFunction::label() const {
  switch (kind_) {
    case Kind::Cosine: return "cos" + std::to_string(k_);
    case Kind::Sine: return "sin" + std::to_string(k_);
    case Kind::Constant: return "const";
    case Kind::Tabulated: return "table";
  }
  return "?";
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_unit(double u) {
  double w = u - std::floor(u);
  return w >= 1.0 ? 0.0 : w;
}

// cubic Hermite on [0,1] between values (a, b) with slopes (da, db) * h
double hermite(double a, double b, double da, double db, double h, double s) {
  double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * a + (s3 - 2 * s2 + s) * h * da + (-2 * s3 + 3 * s2) * b + (s3 - s2) * h * db;
}

}  // namespace

double TestFunction::operator()(double u) const {
  switch (kind_) {
    case Kind::Cosine: return std::numbers::sqrt2 * std::cos(kTwoPi * k_ * u);
    case Kind::Sine: return std::numbers::sqrt2 * std::sin(kTwoPi * k_ * u);
    case Kind::Constant: return c_;
    case Kind::Tabulated: {
      const std::size_t m = f_->size();
      double x = wrap_unit(u) * m;
      std::size_t i = std::min(static_cast<std::size_t>(x), m - 1), j = (i + 1) % m;
      return hermite((*f_)[i], (*f_)[j], (*df_)[i], (*df_)[j], 1.0 / m, x - i);
    }
  }
  return 0;
}

double TestFunction::derivative(double u) const {
  switch (kind_) {
    case Kind::Cosine: return -std::numbers::sqrt2 * kTwoPi * k_ * std::sin(kTwoPi * k_ * u);
    case Kind::Sine: return std::numbers::sqrt2 * kTwoPi * k_ * std::cos(kTwoPi * k_ * u);
    case Kind::Constant: return 0;
    case Kind::Tabulated: {
      const std::size_t m = df_->size();
      double x = wrap_unit(u) * m;
      std::size_t i = std::min(static_cast<std::size_t>(x), m - 1), j = (i + 1) % m;
      return hermite((*df_)[i], (*df_)[j], (*d2f_)[i], (*d2f_)[j], 1.0 / m, x - i);
    }
  }
  return 0;
}

double TestFunction::second_derivative(double u) const {
  const double w = kTwoPi * k_;
  switch (kind_) {
    case Kind::Cosine: return -std::numbers::sqrt2 * w * w * std::cos(w * u);
    case Kind::Sine: return -std::numbers::sqrt2 * w * w * std::sin(w * u);
    case Kind::Constant: return 0;
    case Kind::Tabulated: {
      const std::size_t m = d2f_->size();
      double x = wrap_unit(u) * m;
      std::size_t i = std::min(static_cast<std::size_t>(x), m - 1), j = (i + 1) % m;
      double s = x - i;
      return (1 - s) * (*d2f_)[i] + s * (*d2f_)[j];
    }
  }
  return 0;
}

double TestFunction::l2_norm_sq() const {
  switch (kind_) {
    case Kind::Cosine:
    case Kind::Sine: return 1.0;
    case Kind::Constant: return c_ * c_;
    case Kind::Tabulated: break;
  }
  const int m = 4096;
  double s = 0;
  for (int i = 0; i < m; ++i) {
    double v = (*this)((i + 0.5) / m);
    s += v * v;
  }
  return s / m;
}

double TestFunction::gradient_norm_sq() const {
  switch (kind_) {
    case Kind::Cosine:
    case Kind::Sine: return kTwoPi * kTwoPi * k_ * k_;
    case Kind::Constant: return 0;
    case Kind::Tabulated: break;
  }
  const int m = 4096;
  double s = 0;
  for (int i = 0; i < m; ++i) {
    double v = derivative((i + 0.5) / m);
    s += v * v;
  }
  return s / m;
}

double TestFunction::sup_norm() const {
  if (kind_ == Kind::Cosine || kind_ == Kind::Sine) return std::numbers::sqrt2;
  if (kind_ == Kind::Constant) return std::abs(c_);
  double best = 0;
  for (int i = 0; i < 4096; ++i) best = std::max(best, std::abs((*this)(i / 4096.0)));
  return best;
}

std::vector<double> TestFunction::sample(int n) const {
  std::vector<double> v(n);
  for (int x = 0; x < n; ++x) v[x] = (*this)(static_cast<double>(x) / n);
  return v;
}

double TestFunction::derivative_mismatch() const {
  const double h = 1e-4;
  double worst = 0;
  for (int i = 0; i < 257; ++i) {
    double u = (i + 0.37) / 257.0;
    double d1 = ((*this)(u + h) - (*this)(u - h)) / (2 * h);
    double d2 = (derivative(u + h) - derivative(u - h)) / (2 * h);
    double s1 = std::max(1.0, std::abs(derivative(u))), s2 = std::max(1.0, std::abs(second_derivative(u)));
    worst = std::max(worst, std::abs(d1 - derivative(u)) / s1);
    worst = std::max(worst, std::abs(d2 - second_derivative(u)) / s2);
  }
  return worst;
}

// ---- rates and generator ----

ModelParams ModelParams::stationary(double lambda, const TorusGeometry& g) {
  ModelParams p{lambda, g, stationary_density(lambda, g.dim()), true};
  p.validate();
  return p;
}

ModelParams ModelParams::with_density(double lambda, const TorusGeometry& g, double rho) {
  ModelParams p{lambda, g, rho, false};
  p.validate();
  return p;
}

void ModelParams::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("density must lie in (0,1)");
  if (stationary_reference && std::abs(forcing(rho, lambda, geometry.dim())) > 1e-12)
    throw std::invalid_argument("reference density is not a root of the forcing term");
}

double reaction_rate(const Configuration& c, Site x, const ModelParams& p) {
  if (c.occupied(x)) return 1.0;
  const auto& g = c.geometry();
  int m = 0;
  for (int j = 0; j < g.dim(); ++j) m += c.value(g.neighbor(x, j, -1)) * c.value(g.neighbor(x, j, +1));
  return 1.0 + p.lambda * m;
}

double forcing(double m, double lambda, int dim) { return (1.0 - m) * (1.0 + lambda * dim * m * m) - m; }

double stationary_density(double lambda, int dim) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-15) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (forcing(mid, lambda, dim) > 0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double apply_generator(const Observable& fn, const Configuration& c, const ModelParams& p) {
  const auto& g = c.geometry();
  const double f0 = fn(c);
  double ex = 0, re = 0;
  Configuration w = c;
  for (Site x = 0; x < g.site_count(); ++x) {
    for (int j = 0; j < g.dim(); ++j) {
      Site y = g.neighbor(x, j, +1);
      w.swap(x, y);
      ex += fn(w) - f0;
      w.swap(x, y);
    }
    w.flip(x);
    re += reaction_rate(c, x, p) * (fn(w) - f0);
    w.flip(x);
  }
  return p.exchange_rate() * ex + re;
}

double field_value(const Configuration& c, const TestFunction& f, double rho) {
  const auto& g = c.geometry();
  if (g.dim() != 1) throw std::invalid_argument("the density field is defined for d = 1");
  const int n = g.side();
  double s = 0;
  for (int x = 0; x < n; ++x) s += f(static_cast<double>(x) / n) * (c.value(x) - rho);
  return s / std::sqrt(static_cast<double>(n));
}

DynkinExpansion dynkin_expansion(const TestFunction& f, const ModelParams& p) {
  if (p.geometry.dim() != 1) throw std::invalid_argument("the Dynkin expansion is derived for d = 1");
  const int n = p.geometry.side();
  const double lam = p.lambda, rho = p.rho;
  const auto fx = f.sample(n);
  auto at = [&](int x) { return fx[((x % n) + n) % n]; };
  DynkinExpansion e;
  e.n = n;
  e.rho = rho;
  e.scale = 1.0 / std::sqrt(static_cast<double>(n));
  e.laplacian.resize(n);
  e.linear.resize(n);
  e.pair_adjacent.resize(n);
  e.pair_gap.resize(n);
  e.triple.resize(n);
  e.constant.resize(n);
  const double nn = static_cast<double>(n) * n;
  const double force = forcing(rho, lam, 1);
  for (int x = 0; x < n; ++x) {
    e.laplacian[x] = nn * (at(x + 1) + at(x - 1) - 2 * at(x));
    e.linear[x] = -(2 + lam * rho * rho) * at(x) + lam * rho * (1 - rho) * (at(x + 1) + at(x - 1));
    e.pair_adjacent[x] = -lam * rho * (at(x - 1) + at(x));
    e.pair_gap[x] = lam * (1 - rho) * at(x - 1);
    e.triple[x] = -lam * at(x - 1);
    e.constant[x] = force * at(x);
  }
  return e;
}

double DynkinExpansion::evaluate(std::span<const std::uint8_t> occ) const {
  if (static_cast<int>(occ.size()) != n) throw std::invalid_argument("configuration size mismatch");
  double s = 0;
  for (int x = 0; x < n; ++x) {
    double e0 = occ[x] - rho, e1 = occ[(x + n - 1) % n] - rho, e2 = occ[(x + 2 * n - 2) % n] - rho;
    s += site_term(x, e2, e1, e0);
  }
  return scale * s;
}

double DynkinExpansion::evaluate(const Configuration& c) const {
  auto v = c.to_vector();
  return evaluate(std::span<const std::uint8_t>(v));
}

}  // namespace rdsim
