#include "complab/trig_poly.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "complab/errors.hpp"

namespace complab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double reduce(double x) { return x - std::round(x); }

// Largest |coefficient| of f^{(order)}, computed from the coefficients of f.
double derivative_scale(const TrigPoly& f, int order) {
  double scale = order == 0 ? std::abs(f.constant()) : 0.0;
  for (int n = 1; n <= f.degree(); ++n) {
    const double c = std::max(std::abs(f.cos_coeffs()[n - 1]), std::abs(f.sin_coeffs()[n - 1]));
    scale = std::max(scale, c * std::pow(kTwoPi * n, order));
  }
  return scale;
}

}  // namespace

TrigPoly::TrigPoly(double constant, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs)
    : constant_(constant), cos_(std::move(cos_coeffs)), sin_(std::move(sin_coeffs)) {
  trim();
}

TrigPoly TrigPoly::cosine(int n, double amplitude) {
  std::vector<double> c(n, 0.0);
  c[n - 1] = amplitude;
  return TrigPoly(0.0, std::move(c), {});
}

TrigPoly TrigPoly::sine(int n, double amplitude) {
  std::vector<double> s(n, 0.0);
  s[n - 1] = amplitude;
  return TrigPoly(0.0, {}, std::move(s));
}

void TrigPoly::trim() {
  const std::size_t n = std::max(cos_.size(), sin_.size());
  cos_.resize(n, 0.0);
  sin_.resize(n, 0.0);
  while (!cos_.empty() && cos_.back() == 0.0 && sin_.back() == 0.0) {
    cos_.pop_back();
    sin_.pop_back();
  }
}

double TrigPoly::max_coeff() const {
  double m = std::abs(constant_);
  for (std::size_t i = 0; i < cos_.size(); ++i) m = std::max({m, std::abs(cos_[i]), std::abs(sin_[i])});
  return m;
}

double TrigPoly::derivative_at(double x, int order) const {
  const double xr = reduce(x);
  double sum = order == 0 ? constant_ : 0.0;
  for (int n = 1; n <= degree(); ++n) {
    const double c = cos_[n - 1];
    const double s = sin_[n - 1];
    if (c == 0.0 && s == 0.0) continue;
    const double w = kTwoPi * n;
    const double cw = std::cos(w * xr);
    const double sw = std::sin(w * xr);
    double term = 0.0;
    switch (order % 4) {
      case 0: term = c * cw + s * sw; break;
      case 1: term = -c * sw + s * cw; break;
      case 2: term = -c * cw - s * sw; break;
      default: term = c * sw - s * cw; break;
    }
    sum += term * std::pow(w, order);
  }
  return sum;
}

std::vector<double> TrigPoly::taylor(double x0, int n) const {
  std::vector<double> out(n + 1);
  double factorial = 1.0;
  for (int j = 0; j <= n; ++j) {
    if (j > 0) factorial *= j;
    out[j] = derivative_at(x0, j) / factorial;
  }
  return out;
}

TrigPoly TrigPoly::derivative(int order) const {
  if (order < 0) throw std::invalid_argument("derivative order must be nonnegative");
  TrigPoly f = *this;
  for (int step = 0; step < order; ++step) {
    std::vector<double> c(f.cos_.size()), s(f.sin_.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double w = kTwoPi * static_cast<double>(i + 1);
      c[i] = w * f.sin_[i];
      s[i] = -w * f.cos_[i];
    }
    f = TrigPoly(0.0, std::move(c), std::move(s));
  }
  return f;
}

TrigPoly TrigPoly::shifted(double shift) const {
  std::vector<double> c(cos_.size()), s(sin_.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double phi = kTwoPi * static_cast<double>(i + 1) * shift;
    c[i] = cos_[i] * std::cos(phi) + sin_[i] * std::sin(phi);
    s[i] = sin_[i] * std::cos(phi) - cos_[i] * std::sin(phi);
  }
  return TrigPoly(constant_, std::move(c), std::move(s));
}

TrigPoly TrigPoly::reflected() const {
  std::vector<double> s = sin_;
  for (double& v : s) v = -v;
  return TrigPoly(constant_, cos_, std::move(s));
}

TrigPoly TrigPoly::pow(int exponent) const {
  if (exponent < 0) throw std::invalid_argument("TrigPoly::pow: negative exponent");
  TrigPoly result = constant_fn(1.0);
  for (int i = 0; i < exponent; ++i) result = result * *this;
  return result;
}

TrigPoly TrigPoly::operator+(const TrigPoly& other) const {
  const std::size_t n = std::max(cos_.size(), other.cos_.size());
  std::vector<double> c(n, 0.0), s(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < cos_.size()) { c[i] += cos_[i]; s[i] += sin_[i]; }
    if (i < other.cos_.size()) { c[i] += other.cos_[i]; s[i] += other.sin_[i]; }
  }
  return TrigPoly(constant_ + other.constant_, std::move(c), std::move(s));
}

TrigPoly TrigPoly::operator-(const TrigPoly& other) const { return *this + other * -1.0; }

TrigPoly TrigPoly::operator*(double scale) const {
  std::vector<double> c = cos_, s = sin_;
  for (double& v : c) v *= scale;
  for (double& v : s) v *= scale;
  return TrigPoly(constant_ * scale, std::move(c), std::move(s));
}

TrigPoly TrigPoly::operator*(const TrigPoly& other) const {
  // Convolve exponential-basis coefficients F_n, n in [-D, D].
  using cplx = std::complex<double>;
  auto to_exp = [](const TrigPoly& f) {
    const int d = f.degree();
    std::vector<cplx> e(2 * d + 1);
    e[d] = f.constant_;
    for (int n = 1; n <= d; ++n) {
      e[d + n] = cplx(f.cos_[n - 1], -f.sin_[n - 1]) / 2.0;
      e[d - n] = std::conj(e[d + n]);
    }
    return e;
  };
  const auto fe = to_exp(*this);
  const auto ge = to_exp(other);
  const int d1 = degree(), d2 = other.degree(), d = d1 + d2;
  std::vector<cplx> h(2 * d + 1, 0.0);
  for (int i = -d1; i <= d1; ++i)
    for (int j = -d2; j <= d2; ++j) h[d + i + j] += fe[d1 + i] * ge[d2 + j];
  std::vector<double> c(d), s(d);
  for (int n = 1; n <= d; ++n) {
    c[n - 1] = 2.0 * h[d + n].real();
    s[n - 1] = -2.0 * h[d + n].imag();
  }
  return TrigPoly(h[d].real(), std::move(c), std::move(s));
}

double eval(const TrigPoly& f, double x) { return f(x); }

TrigPoly derivative(const TrigPoly& f, int order) { return f.derivative(order); }

double circle_delta(double from, double to) { return reduce(to - from); }

ZeroOrder zero_order(const TrigPoly& f, double x0, int max_order, double tol) {
  for (int j = 0; j <= max_order; ++j) {
    const double scale = derivative_scale(f, j);
    if (scale == 0.0) continue;
    const double v = f.derivative_at(x0, j);
    if (std::abs(v) > tol * scale) return {j, v};
  }
  throw NumericError(ErrorCode::OrderTooHigh,
                     "no derivative up to order " + std::to_string(max_order) + " is nonzero");
}

namespace {

// Tries orders k from high to low: Newton on f^{(k-1)}, which has a simple
// zero at a zero of order k, then accepts if f, ..., f^{(k-2)} vanish there.
std::optional<double> polish_zero(const TrigPoly& f, double c, const ZeroTolerances& tol) {
  auto small = [&](double x, int j) {
    const double scale = derivative_scale(f, j);
    return scale == 0.0 || std::abs(f.derivative_at(x, j)) <= tol.order * scale;
  };
  for (int k = tol.max_order; k >= 1; --k) {
    if (derivative_scale(f, k) == 0.0) continue;
    double x = c;
    for (int it = 0; it < 100; ++it) {
      const double d = f.derivative_at(x, k);
      if (d == 0.0) break;
      const double step = std::clamp(f.derivative_at(x, k - 1) / d, -1e-3, 1e-3);
      const double next = x - step;
      if (next == x) break;
      x = next;
      if (std::abs(step) <= 1e-17) break;
    }
    if (std::abs(circle_delta(c, x)) > 1e-2 || small(x, k)) continue;
    bool ok = true;
    for (int j = 0; j < k && ok; ++j) ok = small(x, j);
    if (!ok) continue;
    x = x - std::floor(x);
    if (x >= 1.0) x = 0.0;
    if (std::abs(f(x)) > tol.zero * f.max_coeff()) continue;
    return x;
  }
  // Flat beyond max_order: keep the point so the order check can reject it.
  for (int j = 0; j <= tol.max_order; ++j)
    if (!small(c, j)) return std::nullopt;
  return c - std::floor(c);
}

double bisect(const TrigPoly& g, double lo, double hi, double glo) {
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> find_zeros(const TrigPoly& f, const ZeroTolerances& tol) {
  const double scale = f.max_coeff();
  if (scale <= tol.zero) throw NumericError(ErrorCode::IdenticallyZero, "coefficient function vanishes");
  if (f.degree() == 0) return {};

  const int n = std::max(tol.grid_n, 8 * f.degree());
  std::vector<double> candidates;
  for (int j = 0; j < tol.max_order; ++j) {
    const TrigPoly g = f.derivative(j);
    if (g.is_zero()) break;
    double x_prev = 0.0;
    double g_prev = g(0.0);
    for (int i = 1; i <= n; ++i) {
      const double x = static_cast<double>(i) / n;
      const double gx = g(x);
      if (g_prev == 0.0) {
        candidates.push_back(x_prev);
      } else if ((gx < 0.0) != (g_prev < 0.0) && gx != 0.0) {
        candidates.push_back(bisect(g, x_prev, x, g_prev));
      }
      x_prev = x;
      g_prev = gx;
    }
  }

  std::vector<double> zeros;
  for (double c : candidates) {
    if (std::abs(f(c)) > 1e-6 * scale) continue;
    if (auto z = polish_zero(f, c, tol)) zeros.push_back(*z);
  }
  std::sort(zeros.begin(), zeros.end());
  std::vector<double> unique;
  for (double z : zeros) {
    if (!unique.empty() && std::abs(circle_delta(unique.back(), z)) < 1e-7) continue;
    unique.push_back(z);
  }
  if (unique.size() > 1 && std::abs(circle_delta(unique.back(), unique.front())) < 1e-7) unique.pop_back();
  return unique;
}

std::vector<double> find_zeros(const TrigPoly& f, int grid_n, double tol) {
  ZeroTolerances t;
  t.grid_n = grid_n;
  t.zero = tol;
  return find_zeros(f, t);
}

ZeroRecord zero_profile(const TrigPoly& a, const TrigPoly& b, double x0, const ZeroTolerances& tol) {
  ZeroRecord z;
  z.location = x0 - std::floor(x0);
  if (z.location >= 1.0) z.location = 0.0;
  const ZeroOrder oa = zero_order(a, x0, tol.max_order, tol.order);
  if (oa.k == 0) throw std::invalid_argument("zero_profile: a does not vanish at x0");
  z.order_a = oa.k;
  z.a_lead = oa.lead;
  z.b_value = b(x0);
  if (b.is_zero()) {
    z.order_b = kInfiniteOrder;
    z.b_lead = 0.0;
    return z;
  }
  try {
    const ZeroOrder ob = zero_order(b, x0, tol.max_order, tol.order);
    z.order_b = ob.k;
    z.b_lead = ob.lead;
  } catch (const NumericError&) {
    z.order_b = kInfiniteOrder;
    z.b_lead = 0.0;
  }
  return z;
}

}  // namespace complab
