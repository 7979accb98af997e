#pragma once

// Periodic coefficient functions on the circle R/Z as finite Fourier sums,
// with exact term-by-term differentiation and zero/order analysis.

#include <limits>
#include <optional>
#include <vector>

namespace complab {

/// Finite Fourier series
///   f(x) = constant + sum_n cos_coeffs[n-1] cos(2 pi n x) + sin_coeffs[n-1] sin(2 pi n x)
/// on R/Z. Values are immutable after construction.
class TrigPoly {
 public:
  TrigPoly() = default;
  TrigPoly(double constant, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs);

  static TrigPoly constant_fn(double c) { return TrigPoly(c, {}, {}); }
  static TrigPoly cosine(int n, double amplitude = 1.0);
  static TrigPoly sine(int n, double amplitude = 1.0);

  double constant() const { return constant_; }
  const std::vector<double>& cos_coeffs() const { return cos_; }
  const std::vector<double>& sin_coeffs() const { return sin_; }

  int degree() const { return static_cast<int>(cos_.size()); }
  double max_coeff() const;
  bool is_zero() const { return max_coeff() == 0.0; }

  double operator()(double x) const { return derivative_at(x, 0); }
  /// f^{(order)}(x) without materializing the derivative polynomial.
  double derivative_at(double x, int order) const;
  /// Power-series coefficients f^{(j)}(x0)/j! for j = 0..n.
  std::vector<double> taylor(double x0, int n) const;

  TrigPoly derivative(int order = 1) const;
  /// g(x) = f(x + s).
  TrigPoly shifted(double s) const;
  /// g(x) = f(-x).
  TrigPoly reflected() const;
  TrigPoly pow(int exponent) const;

  TrigPoly operator+(const TrigPoly& other) const;
  TrigPoly operator-(const TrigPoly& other) const;
  TrigPoly operator*(const TrigPoly& other) const;
  TrigPoly operator*(double s) const;
  TrigPoly operator-() const { return *this * -1.0; }

  bool operator==(const TrigPoly&) const = default;

 private:
  void trim();

  double constant_ = 0.0;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

inline TrigPoly operator*(double s, const TrigPoly& f) { return f * s; }

double eval(const TrigPoly& f, double x);
TrigPoly derivative(const TrigPoly& f, int order);

struct ZeroTolerances {
  double zero = 1e-10;   // |f| threshold, relative to max Fourier coefficient
  double order = 1e-8;   // |f^{(j)}| threshold, relative to max coefficient of f^{(j)}
  int max_order = 12;
  int grid_n = 1024;
};

/// All zeros in [0,1), sorted. Throws NumericError(IdenticallyZero) for f == 0.
std::vector<double> find_zeros(const TrigPoly& f, int grid_n = 1024, double tol = 1e-10);
std::vector<double> find_zeros(const TrigPoly& f, const ZeroTolerances& tol);

struct ZeroOrder {
  int k = 0;
  double lead = 0.0;  // f^{(k)}(x0)
};

/// Smallest k <= max_order with |f^{(k)}(x0)| above tolerance. Throws
/// NumericError(OrderTooHigh) when every derivative up to max_order vanishes.
ZeroOrder zero_order(const TrigPoly& f, double x0, int max_order = 12, double tol = 1e-8);

inline constexpr int kInfiniteOrder = std::numeric_limits<int>::max();

struct ZeroRecord {
  double location = 0.0;  // in [0,1)
  int order_a = 1;        // k
  double a_lead = 0.0;    // a^{(k)}(x0)
  double b_value = 0.0;   // b(x0)
  // Order of vanishing of b at x0: 0 when b(x0) != 0, kInfiniteOrder when b
  // vanishes to every tested order.
  int order_b = 0;
  double b_lead = 0.0;  // b^{(l)}(x0), or b(x0) when order_b == 0

  bool b_vanishes() const { return order_b > 0; }
  bool operator==(const ZeroRecord&) const = default;
};

ZeroRecord zero_profile(const TrigPoly& a, const TrigPoly& b, double x0,
                        const ZeroTolerances& tol = {});

/// Shortest signed displacement from `from` to `to` on R/Z, in [-1/2, 1/2).
double circle_delta(double from, double to);

}  // namespace complab
