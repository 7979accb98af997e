#pragma once

// Local solution theory at a zero x0 of a for (P - lambda) u = 0, written in
// the one-sided coordinate t = |x - x0| as
//   A(t) u'' + B2(t) u' + C(t) u = 0.
//
// Every local solution built here is a (possibly logarithmic) series
//   u(t) = t^rho ( sum_n p_n t^n + log t * sum_n q_n t^n ).
// The coefficients come from one recurrence: collect the coefficient of
// t^{rho + shift + n} in L[u]. The shift selects the balance:
//   shift = k - 2   regular singular point (Frobenius),
//   shift = l - 1   irregular point where B2 has order l and A order >= l + 2,
//   shift = -1      smooth solution when B2(0) != 0.

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "complab/classifier.hpp"

namespace complab {

using cplx = std::complex<double>;

enum class Side { Right, Left };

std::string to_string(Side s);

struct LocalODE {
  double x0 = 0.0;
  Side side = Side::Right;
  int k = 1;  // order of A at t = 0
  cplx lambda{0.0, 0.0};
  bool include_a4 = false;
  bool phase_stripped = false;  // b replaced by -b (equation for u3 in u = u3 exp(iE))
  std::vector<cplx> taylor_a;
  std::vector<cplx> taylor_b2;
  std::vector<cplx> taylor_c;

  int order() const { return static_cast<int>(taylor_a.size()) - 1; }
};

/// Taylor data of A = a, B2 = a' - i b, C = -(i/2) b' - lambda (+ a''/4) at x0,
/// in the coordinate t pointing into `side`. Entries that vanish because of the
/// recorded zero orders are set to exact zeros.
LocalODE expand_operator(const SturmLiouvilleOperator& op, double x0, cplx lambda, int order,
                         Side side = Side::Right, bool phase_stripped = false);

/// Builds the local equation from oriented real Taylor data of (a, b).
LocalODE local_ode_from_taylor(std::span<const double> a, std::span<const double> b, cplx lambda,
                               bool include_a4 = false);

/// Order of vanishing of a coefficient sequence (size() when identically zero).
int series_order(std::span<const cplx> s);

bool is_regular_singular(const LocalODE& ode);

struct IndicialEquation {
  cplx alpha2, alpha1, alpha0;
  cplx r1, r2;  // Re r1 >= Re r2
  bool resonant = false;
  int resonance_gap = 0;  // r1 - r2 when resonant

  cplx operator()(cplx r) const { return (alpha2 * r + alpha1) * r + alpha0; }
};

/// Quadratic from the lowest-order balance of the recurrence:
///   a_k r(r-1) + b2_{k-1} r + c_{k-2} = 0.
/// Throws NumericError(NotRegularSingular).
IndicialEquation indicial_equation(const LocalODE& ode);

struct FrobeniusSeries {
  cplx exponent{0.0, 0.0};
  Side side = Side::Right;
  std::vector<cplx> coeffs;
  std::optional<std::vector<cplx>> log_partner;  // multiplies log t
  int truncation = 0;
  int shift = 0;  // power offset of the recurrence that produced the series

  bool has_log() const { return log_partner.has_value(); }
  cplx value(double t) const;
  cplx derivative(double t) const;
  /// Root-test estimate min_n |c_n|^{-1/n} over the upper half of the coefficients.
  double empirical_radius() const;
};

/// Series for the indicial root `root`. When `root` is the smaller member of a
/// resonant pair with distinct roots, the log branch is populated. Throws
/// NumericError(RecurrenceBreakdown) if `root` does not solve the indicial equation.
FrobeniusSeries frobenius_series(const LocalODE& ode, cplx root, int n_terms);

struct FrobeniusBasis {
  IndicialEquation indicial;
  FrobeniusSeries first;   // root r1
  FrobeniusSeries second;  // root r2, logarithmic when resonant
};

FrobeniusBasis frobenius_basis(const LocalODE& ode, int n_terms);

struct IrregularSolution {
  FrobeniusSeries series;  // exponent -gamma0, v(0) = 1
  int l = 0;               // order of B2 at t = 0
  cplx gamma0;             // constant term of the normalised zeroth-order coefficient
};

/// Formal solution t^{-gamma0} v(t) at an irregular point where B2 has order
/// l >= 1 and A has order >= l + 2. Dividing by B2(t)/t brings the equation to
///   t^3 alpha u'' + (t + t^2 beta) u' + (gamma0 + t gamma) u = 0,
/// with gamma0 = c_{l-1} / b2_l, which equals l/2 at lambda = 0.
/// Throws NumericError(ShapeMismatch) when the leading structure is absent.
IrregularSolution irregular_solution(const LocalODE& ode, int n_terms);

/// Smooth formal solution (exponent 0, c0 = 1) when B2(0) != 0 and A(0) = A'(0) = 0.
FrobeniusSeries smooth_solution(const LocalODE& ode, int n_terms);

struct PhasePrincipal {
  std::vector<std::pair<int, double>> terms;  // (power, coefficient), powers <= -1
  double log_coefficient = 0.0;

  double operator()(double t) const;
};

/// Divergent part of an antiderivative of b/a, with a of order k at t = 0.
PhasePrincipal phase_principal_part(std::span<const double> a, std::span<const double> b, int k);

struct OscillatoryPair {
  FrobeniusSeries u1_series;
  FrobeniusSeries u3_series;
  PhasePrincipal phase_principal;
  double log_coefficient = 0.0;
};

/// Two solutions at a degenerate zero with b(x0) != 0: u1 smooth, and
/// u2 = u3 exp(iE) with E' = b/a, where u3 solves the equation with b -> -b.
OscillatoryPair oscillatory_pair(const SturmLiouvilleOperator& op, const ZeroRecord& zero, cplx lambda,
                                 int n_terms, Side side = Side::Right);

/// |t^r (log t)^j| is square integrable near 0 iff Re r > -1/2.
bool l2_near_singularity(cplx exponent, bool log_flag);

struct SeriesResidual {
  double low_order_max = 0.0;  // largest relative residual coefficient inside the truncation
  std::vector<double> h;
  std::vector<double> residual;
  double slope = 0.0;  // least-squares d log|residual| / d log h; +inf when exact
};

/// Residual of the truncated series substituted into the local equation,
/// evaluated from the coefficient tail beyond the truncation.
SeriesResidual series_residual(const LocalODE& ode, const FrobeniusSeries& series, std::span<const double> hs);

}  // namespace complab
