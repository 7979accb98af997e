#include "complab/frobenius.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "complab/errors.hpp"

namespace complab {

namespace {

cplx at(std::span<const cplx> v, int i) {
  return (i < 0 || i >= static_cast<int>(v.size())) ? cplx{} : v[i];
}

// Coefficient of t^{rho+shift+n} contributed by t^{r} with r = rho + m, j = n - m.
cplx rec_f(const LocalODE& ode, int shift, int j, cplx r) {
  return at(ode.taylor_a, shift + 2 + j) * r * (r - 1.0) + at(ode.taylor_b2, shift + 1 + j) * r +
         at(ode.taylor_c, shift + j);
}

// Same terms with absolute values, used as a cancellation-free scale.
double rec_f_abs(const LocalODE& ode, int shift, int j, cplx r) {
  return std::abs(at(ode.taylor_a, shift + 2 + j) * r * (r - 1.0)) + std::abs(at(ode.taylor_b2, shift + 1 + j) * r) +
         std::abs(at(ode.taylor_c, shift + j));
}

// d/dr of rec_f: contribution of t^r log t beyond the log t * L[t^r] part.
cplx rec_g(const LocalODE& ode, int shift, int j, cplx r) {
  return at(ode.taylor_a, shift + 2 + j) * (2.0 * r - 1.0) + at(ode.taylor_b2, shift + 1 + j);
}

void require_order(const LocalODE& ode, int shift, int n_terms) {
  if (ode.order() < shift + 2 + n_terms)
    throw std::invalid_argument("local equation truncated below the requested series order");
}

std::vector<cplx> solve_plain(const LocalODE& ode, int shift, cplx rho, int n_terms) {
  require_order(ode, shift, n_terms);
  std::vector<cplx> p(n_terms + 1);
  p[0] = 1.0;
  for (int n = 1; n <= n_terms; ++n) {
    const cplx diag = rec_f(ode, shift, 0, rho + static_cast<double>(n));
    cplx sum = 0.0;
    double mag = 0.0;
    for (int m = 0; m < n; ++m) {
      const cplx term = p[m] * rec_f(ode, shift, n - m, rho + static_cast<double>(m));
      sum += term;
      mag += std::abs(term);
    }
    if (std::abs(diag) <= 1e-13 * std::max(1.0, std::abs(rho + static_cast<double>(n)))) {
      if (mag == 0.0) {
        p[n] = 0.0;
        continue;
      }
      throw NumericError(ErrorCode::RecurrenceBreakdown,
                         "vanishing recurrence denominator at n = " + std::to_string(n));
    }
    p[n] = -sum / diag;
  }
  return p;
}

FrobeniusSeries make_series(const LocalODE& ode, cplx rho, std::vector<cplx> p, int shift, int n_terms) {
  FrobeniusSeries s;
  s.exponent = rho;
  s.side = ode.side;
  s.coeffs = std::move(p);
  s.truncation = n_terms;
  s.shift = shift;
  return s;
}

// Second solution at a resonant pair r1 = r2 + gap:
//   u2 = kappa u1 log t + t^{r2} sum d_n t^n,
// stored as t^{r2} (sum d_n t^n + log t * sum q_n t^n) with q_n = kappa c_{n-gap}.
FrobeniusSeries log_branch(const LocalODE& ode, const IndicialEquation& ind, int n_terms) {
  const int shift = ode.k - 2;
  const int gap = ind.resonance_gap;
  const cplx r2 = ind.r2;
  const std::vector<cplx> c = solve_plain(ode, shift, ind.r1, n_terms);

  std::vector<cplx> d(n_terms + 1, 0.0), q(n_terms + 1, 0.0);
  cplx kappa = 1.0;
  if (gap == 0) {
    d[0] = 0.0;
    for (int n = 0; n <= n_terms; ++n) q[n] = c[n];
  } else {
    d[0] = 1.0;
  }
  for (int n = 1; n <= n_terms; ++n) {
    cplx sum = 0.0;
    for (int m = 0; m < n; ++m) sum += d[m] * rec_f(ode, shift, n - m, r2 + static_cast<double>(m));
    if (gap > 0 && n == gap) {
      kappa = -sum / (c[0] * rec_g(ode, shift, 0, ind.r1));
      for (int i = gap; i <= n_terms; ++i) q[i] = kappa * c[i - gap];
      d[n] = 0.0;
      continue;
    }
    for (int m = 0; m <= n; ++m) sum += q[m] * rec_g(ode, shift, n - m, r2 + static_cast<double>(m));
    d[n] = -sum / rec_f(ode, shift, 0, r2 + static_cast<double>(n));
  }
  FrobeniusSeries s = make_series(ode, r2, std::move(d), shift, n_terms);
  s.log_partner = std::move(q);
  return s;
}

std::pair<std::vector<double>, std::vector<double>> oriented_taylor(const SturmLiouvilleOperator& op,
                                                                    const ZeroRecord& zr, int n, Side side) {
  std::vector<double> a = op.a().taylor(zr.location, n);
  std::vector<double> b = op.b().taylor(zr.location, n);
  const double sigma = side == Side::Right ? 1.0 : -1.0;
  double sj = 1.0;
  for (int j = 0; j <= n; ++j) {
    // t = sigma (x - x0); b picks up one extra sign from d_x = sigma d_t.
    a[j] *= sj;
    b[j] *= sj * sigma;
    sj *= sigma;
  }
  for (int j = 0; j < std::min(zr.order_a, n + 1); ++j) a[j] = 0.0;
  if (zr.order_b > 0) {
    const int stop = zr.order_b == kInfiniteOrder ? n + 1 : std::min(zr.order_b, n + 1);
    for (int j = 0; j < stop; ++j) b[j] = 0.0;
  }
  return {std::move(a), std::move(b)};
}

ZeroRecord record_at(const SturmLiouvilleOperator& op, double x0) {
  for (const ZeroRecord& z : op.zeros())
    if (std::abs(circle_delta(z.location, x0)) < 1e-9) return z;
  return zero_profile(op.a(), op.b(), x0, op.tolerances());
}

}  // namespace

std::string to_string(Side s) { return s == Side::Right ? "right" : "left"; }

int series_order(std::span<const cplx> s) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] != 0.0) return static_cast<int>(i);
  return static_cast<int>(s.size());
}

LocalODE local_ode_from_taylor(std::span<const double> a, std::span<const double> b, cplx lambda,
                               bool include_a4) {
  const int order = static_cast<int>(std::min(a.size(), b.size())) - 3;
  if (order < 0) throw std::invalid_argument("local_ode_from_taylor: too few Taylor coefficients");
  auto ai = [&](int i) { return i < static_cast<int>(a.size()) ? a[i] : 0.0; };
  auto bi = [&](int i) { return i < static_cast<int>(b.size()) ? b[i] : 0.0; };
  LocalODE ode;
  ode.lambda = lambda;
  ode.include_a4 = include_a4;
  const cplx I(0.0, 1.0);
  for (int j = 0; j <= order; ++j) {
    ode.taylor_a.push_back(ai(j));
    ode.taylor_b2.push_back((j + 1.0) * ai(j + 1) - I * bi(j));
    cplx c = -0.5 * I * (j + 1.0) * bi(j + 1);
    if (j == 0) c -= lambda;
    if (include_a4) c += 0.25 * (j + 1.0) * (j + 2.0) * ai(j + 2);
    ode.taylor_c.push_back(c);
  }
  ode.k = series_order(ode.taylor_a);
  if (ode.k > order) throw std::invalid_argument("local_ode_from_taylor: a vanishes to the truncation order");
  return ode;
}

LocalODE expand_operator(const SturmLiouvilleOperator& op, double x0, cplx lambda, int order, Side side,
                         bool phase_stripped) {
  const ZeroRecord zr = record_at(op, x0);
  auto [a, b] = oriented_taylor(op, zr, order + 2, side);
  if (phase_stripped)
    for (double& v : b) v = -v;
  LocalODE ode = local_ode_from_taylor(a, b, lambda, op.include_a4());
  ode.x0 = zr.location;
  ode.side = side;
  ode.phase_stripped = phase_stripped;
  return ode;
}

bool is_regular_singular(const LocalODE& ode) {
  return series_order(ode.taylor_b2) >= ode.k - 1 && series_order(ode.taylor_c) >= ode.k - 2;
}

IndicialEquation indicial_equation(const LocalODE& ode) {
  if (!is_regular_singular(ode))
    throw NumericError(ErrorCode::NotRegularSingular, "lower-order coefficients vanish too slowly");
  const int k = ode.k;
  IndicialEquation eq;
  eq.alpha2 = at(ode.taylor_a, k);
  eq.alpha1 = at(ode.taylor_b2, k - 1) - eq.alpha2;
  eq.alpha0 = at(ode.taylor_c, k - 2);

  cplx sq = std::sqrt(eq.alpha1 * eq.alpha1 - 4.0 * eq.alpha2 * eq.alpha0);
  if ((std::conj(eq.alpha1) * sq).real() < 0.0) sq = -sq;
  const cplx q = -0.5 * (eq.alpha1 + sq);
  cplx ra = 0.0, rb = 0.0;
  if (q != 0.0) {
    ra = q / eq.alpha2;
    rb = eq.alpha0 / q;
  }
  auto before = [](cplx x, cplx y) { return x.real() > y.real() || (x.real() == y.real() && x.imag() >= y.imag()); };
  eq.r1 = before(ra, rb) ? ra : rb;
  eq.r2 = before(ra, rb) ? rb : ra;

  const cplx diff = eq.r1 - eq.r2;
  const double nearest = std::round(diff.real());
  if (std::abs(diff.imag()) < 1e-9 && std::abs(diff.real() - nearest) < 1e-9) {
    eq.resonant = true;
    eq.resonance_gap = static_cast<int>(nearest);
  }
  return eq;
}

FrobeniusSeries frobenius_series(const LocalODE& ode, cplx root, int n_terms) {
  const IndicialEquation ind = indicial_equation(ode);
  auto close = [](cplx x, cplx y) { return std::abs(x - y) <= 1e-8 * std::max(1.0, std::abs(y)); };
  if (close(root, ind.r1)) return make_series(ode, ind.r1, solve_plain(ode, ode.k - 2, ind.r1, n_terms), ode.k - 2, n_terms);
  if (!close(root, ind.r2))
    throw NumericError(ErrorCode::RecurrenceBreakdown, "requested exponent does not solve the indicial equation");
  if (ind.resonant) return log_branch(ode, ind, n_terms);
  return make_series(ode, ind.r2, solve_plain(ode, ode.k - 2, ind.r2, n_terms), ode.k - 2, n_terms);
}

FrobeniusBasis frobenius_basis(const LocalODE& ode, int n_terms) {
  FrobeniusBasis basis;
  basis.indicial = indicial_equation(ode);
  const int shift = ode.k - 2;
  basis.first = make_series(ode, basis.indicial.r1, solve_plain(ode, shift, basis.indicial.r1, n_terms), shift, n_terms);
  basis.second = basis.indicial.resonant
                     ? log_branch(ode, basis.indicial, n_terms)
                     : make_series(ode, basis.indicial.r2, solve_plain(ode, shift, basis.indicial.r2, n_terms), shift,
                                   n_terms);
  return basis;
}

IrregularSolution irregular_solution(const LocalODE& ode, int n_terms) {
  const int l = series_order(ode.taylor_b2);
  const int ka = series_order(ode.taylor_a);
  const int kc = series_order(ode.taylor_c);
  if (l < 1 || l >= static_cast<int>(ode.taylor_b2.size()))
    throw NumericError(ErrorCode::ShapeMismatch, "first-order coefficient must vanish to finite order >= 1");
  if (ka < l + 2) throw NumericError(ErrorCode::ShapeMismatch, "point is regular singular (k <= l + 1)");
  if (kc < l - 1)
    throw NumericError(ErrorCode::ShapeMismatch, "zeroth-order coefficient dominates the first-order one");
  IrregularSolution sol;
  sol.l = l;
  sol.gamma0 = at(ode.taylor_c, l - 1) / ode.taylor_b2[l];
  const cplx rho = -sol.gamma0;
  sol.series = make_series(ode, rho, solve_plain(ode, l - 1, rho, n_terms), l - 1, n_terms);
  return sol;
}

FrobeniusSeries smooth_solution(const LocalODE& ode, int n_terms) {
  if (ode.k < 2 || at(ode.taylor_b2, 0) == 0.0)
    throw NumericError(ErrorCode::ShapeMismatch, "smooth solution needs k >= 2 and B2(0) != 0");
  return make_series(ode, 0.0, solve_plain(ode, -1, 0.0, n_terms), -1, n_terms);
}

double PhasePrincipal::operator()(double t) const {
  double e = log_coefficient * std::log(t);
  for (const auto& [p, c] : terms) e += c * std::pow(t, p);
  return e;
}

PhasePrincipal phase_principal_part(std::span<const double> a, std::span<const double> b, int k) {
  if (k < 1 || static_cast<int>(a.size()) <= k || a[k] == 0.0)
    throw std::invalid_argument("phase_principal_part: a must have a zero of order k");
  auto ai = [&](int i) { return k + i < static_cast<int>(a.size()) ? a[k + i] : 0.0; };
  auto bi = [&](int i) { return i < static_cast<int>(b.size()) ? b[i] : 0.0; };
  // b/a = t^{-k} Q(t) with Q = b / (a / t^k).
  std::vector<double> q(k);
  for (int n = 0; n < k; ++n) {
    double s = bi(n);
    for (int m = 1; m <= n; ++m) s -= ai(m) * q[n - m];
    q[n] = s / ai(0);
  }
  PhasePrincipal e;
  for (int j = 0; j + 1 < k; ++j)
    if (q[j] != 0.0) e.terms.emplace_back(j - k + 1, q[j] / (j - k + 1));
  e.log_coefficient = q[k - 1];
  return e;
}

OscillatoryPair oscillatory_pair(const SturmLiouvilleOperator& op, const ZeroRecord& zero, cplx lambda, int n_terms,
                                 Side side) {
  if (zero.order_a < 2 || zero.b_vanishes())
    throw std::invalid_argument("oscillatory_pair: needs a degenerate zero with b(x0) != 0");
  const int order = n_terms + 12;
  OscillatoryPair pair;
  pair.u1_series = smooth_solution(expand_operator(op, zero.location, lambda, order, side, false), n_terms);
  pair.u3_series = smooth_solution(expand_operator(op, zero.location, lambda, order, side, true), n_terms);
  const auto [a, b] = oriented_taylor(op, zero, zero.order_a + 2, side);
  pair.phase_principal = phase_principal_part(a, b, zero.order_a);
  pair.log_coefficient = pair.phase_principal.log_coefficient;
  return pair;
}

bool l2_near_singularity(cplx exponent, bool /*log_flag*/) {
  // At Re r = -1/2 both t^{-1} and t^{-1} log^2 t fail to integrate, so a log
  // factor never changes the verdict.
  return exponent.real() > -0.5;
}

cplx FrobeniusSeries::value(double t) const {
  auto horner = [t](const std::vector<cplx>& c) {
    cplx s = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * t + *it;
    return s;
  };
  cplx v = horner(coeffs);
  if (log_partner) v += std::log(t) * horner(*log_partner);
  return std::exp(exponent * std::log(t)) * v;
}

cplx FrobeniusSeries::derivative(double t) const {
  const double lt = std::log(t);
  cplx plain = 0.0, logged = 0.0, extra = 0.0;
  double tn = 1.0;
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    const cplx e = exponent + static_cast<double>(n);
    plain += coeffs[n] * e * tn;
    if (log_partner) {
      logged += (*log_partner)[n] * e * tn;
      extra += (*log_partner)[n] * tn;
    }
    tn *= t;
  }
  return std::exp((exponent - 1.0) * lt) * (plain + lt * logged + extra);
}

double FrobeniusSeries::empirical_radius() const {
  double r = std::numeric_limits<double>::infinity();
  auto scan = [&](const std::vector<cplx>& c) {
    const int n_max = static_cast<int>(c.size()) - 1;
    for (int n = std::max(1, n_max / 2); n <= n_max; ++n)
      if (const double m = std::abs(c[n]); m > 0.0) r = std::min(r, std::pow(m, -1.0 / n));
  };
  scan(coeffs);
  if (log_partner) scan(*log_partner);
  return r;
}

SeriesResidual series_residual(const LocalODE& ode, const FrobeniusSeries& s, std::span<const double> hs) {
  const int shift = s.shift;
  const int n_max = ode.order() - shift - 2;
  const int n_trunc = s.truncation;
  if (n_max <= n_trunc) throw std::invalid_argument("series_residual: local equation too short for a tail");
  const std::vector<cplx> empty;
  const std::vector<cplx>& p = s.coeffs;
  const std::vector<cplx>& q = s.log_partner ? *s.log_partner : empty;

  SeriesResidual out;
  std::vector<cplx> tail_p, tail_q;
  for (int n = 0; n <= n_max; ++n) {
    cplx P = 0.0, Q = 0.0;
    double mag = 0.0;
    for (int m = 0; m <= std::min(n, n_trunc); ++m) {
      const cplx r = s.exponent + static_cast<double>(m);
      const cplx f = rec_f(ode, shift, n - m, r);
      const double fa = rec_f_abs(ode, shift, n - m, r);
      P += p[m] * f;
      mag += std::abs(p[m]) * fa;
      if (!q.empty()) {
        Q += q[m] * f;
        P += q[m] * rec_g(ode, shift, n - m, r);
        mag += std::abs(q[m]) * (fa + std::abs(rec_g(ode, shift, n - m, r)));
      }
    }
    if (n <= n_trunc) {
      if (mag > 0.0) out.low_order_max = std::max({out.low_order_max, std::abs(P) / mag, std::abs(Q) / mag});
    } else {
      tail_p.push_back(P);
      tail_q.push_back(Q);
    }
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (double h : hs) {
    cplx sp = 0.0, sq = 0.0;
    for (std::size_t i = tail_p.size(); i-- > 0;) {
      sp = sp * h + tail_p[i];
      sq = sq * h + tail_q[i];
    }
    const double scale = std::abs(std::exp((s.exponent + static_cast<double>(shift + n_trunc + 1)) * std::log(h)));
    const double r = scale * std::abs(sp + std::log(h) * sq);
    out.h.push_back(h);
    out.residual.push_back(r);
    if (r > 0.0) {
      const double x = std::log(h), y = std::log(r);
      sx += x; sy += y; sxx += x * x; sxy += x * y; ++cnt;
    }
  }
  if (cnt < 2)
    out.slope = std::numeric_limits<double>::infinity();
  else
    out.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  return out;
}

}  // namespace complab
