#include "complab/deficiency.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "complab/errors.hpp"

namespace complab {

std::string to_string(EndpointVerdict v) { return v == EndpointVerdict::LimitPoint ? "LimitPoint" : "LimitCircle"; }

EndpointVerdict endpoint_verdict_from_string(const std::string& s) {
  if (s == "LimitPoint") return EndpointVerdict::LimitPoint;
  if (s == "LimitCircle") return EndpointVerdict::LimitCircle;
  throw std::invalid_argument("unknown endpoint verdict: " + s);
}

std::string to_string(SolutionKind k) {
  switch (k) {
    case SolutionKind::Frobenius: return "Frobenius";
    case SolutionKind::FrobeniusLog: return "FrobeniusLog";
    case SolutionKind::Irregular: return "Irregular";
    case SolutionKind::Smooth: return "Smooth";
    case SolutionKind::Oscillatory: return "Oscillatory";
  }
  return "Frobenius";
}

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double shell_integral(const std::function<cplx(double)>& u, double lo, double hi) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double s) {
    const double t = std::exp(s);
    return std::norm(u(t)) * t;
  };
  return gauss_kronrod<double, 31>::integrate(f, std::log(lo), std::log(hi), 12, 1e-11);
}

}  // namespace

TailTest tail_integral_slope(const std::function<cplx(double)>& u, double c, double eps_hi, double eps_lo) {
  if (!(eps_lo < eps_hi && eps_hi < c)) throw std::invalid_argument("tail_integral_slope: need eps_lo < eps_hi < c");
  TailTest out;
  out.c = c;
  const double step = std::sqrt(10.0);
  for (double e = eps_hi; e >= eps_lo * (1.0 - 1e-9); e /= step) out.eps.push_back(e);
  out.partial.push_back(shell_integral(u, out.eps[0], c));
  for (std::size_t j = 0; j + 1 < out.eps.size(); ++j) {
    const double d = shell_integral(u, out.eps[j + 1], out.eps[j]);
    out.increments.push_back(d);
    out.partial.push_back(out.partial.back() + d);
  }

  // Last two decades: four shells, five partial integrals.
  const std::size_t m = std::min<std::size_t>(4, out.increments.size());
  std::vector<double> lx, ld, lxi, li;
  bool all_zero = true;
  for (std::size_t j = out.increments.size() - m; j < out.increments.size(); ++j) {
    if (out.increments[j] > 0.0) {
      all_zero = false;
      lx.push_back(0.5 * (std::log(out.eps[j]) + std::log(out.eps[j + 1])));
      ld.push_back(std::log(out.increments[j]));
    }
  }
  for (std::size_t j = out.partial.size() - m - 1; j < out.partial.size(); ++j) {
    if (out.partial[j] > 0.0) {
      lxi.push_back(std::log(out.eps[j]));
      li.push_back(std::log(out.partial[j]));
    }
  }
  if (all_zero || lx.size() < 2) {
    out.decay_slope = std::numeric_limits<double>::infinity();
    out.slope = 0.0;
    out.convergent = true;
    out.extrapolated = out.partial.back();
    return out;
  }
  out.decay_slope = fit_slope(lx, ld);
  out.slope = li.size() >= 2 ? fit_slope(lxi, li) : 0.0;
  out.convergent = out.decay_slope > 0.1;
  out.extrapolated = out.partial.back();
  if (out.convergent) {
    const std::size_t n = out.increments.size();
    const double q = out.increments[n - 1] / out.increments[n - 2];
    if (q > 0.0 && q < 1.0) out.extrapolated += out.increments[n - 1] * q / (1.0 - q);
  }
  return out;
}

LocalSolution::LocalSolution(FrobeniusSeries series, const SturmLiouvilleOperator& op, double x0, Side side,
                             cplx lambda, bool flipped, double c)
    : series_(std::move(series)), c_(c) {
  t_match_ = std::min(0.5 * series_.empirical_radius(), c);
  if (t_match_ >= c) return;

  namespace ode = boost::numeric::odeint;
  using state = std::array<double, 4>;
  const double sigma = side == Side::Right ? 1.0 : -1.0;
  const double bsign = flipped ? -1.0 : 1.0;
  const TrigPoly& A = op.a();
  const TrigPoly& B = op.b();
  const bool a4 = op.include_a4();
  const cplx I(0.0, 1.0);

  auto second = [&](double t, cplx w, cplx dw) {
    const double x = x0 + sigma * t;
    const double a = A(x), da = A.derivative_at(x, 1);
    const double b = bsign * B(x), db = bsign * B.derivative_at(x, 1);
    cplx cc = -0.5 * I * db - lambda;
    if (a4) cc += 0.25 * A.derivative_at(x, 2);
    return -(sigma * (da - I * b) * dw + cc * w) / a;
  };
  auto sys = [&](const state& y, state& dy, double t) {
    const cplx w(y[0], y[1]), dw(y[2], y[3]);
    const cplx d2 = second(t, w, dw);
    dy = {dw.real(), dw.imag(), d2.real(), d2.imag()};
  };

  const cplx w0 = series_.value(t_match_), dw0 = series_.derivative(t_match_);
  state y{w0.real(), w0.imag(), dw0.real(), dw0.imag()};
  nodes_.push_back({t_match_, w0, dw0, second(t_match_, w0, dw0)});
  const double scale = std::max(std::abs(w0), std::abs(dw0) * t_match_);
  auto stepper = ode::make_controlled(1e-14 * scale, 1e-11, ode::runge_kutta_dopri5<state>());
  double t = t_match_;
  double dt = 1e-3 * t_match_;
  const double dt_max = (c - t_match_) / 64.0;
  int guard = 0;
  while (t < c && guard++ < 1'000'000) {
    double h = std::min({dt, dt_max, c - t});
    if (stepper.try_step(sys, y, t, h) == ode::fail) {
      dt = h;
      continue;
    }
    dt = h;
    const cplx w(y[0], y[1]), dw(y[2], y[3]);
    nodes_.push_back({t, w, dw, second(t, w, dw)});
    if (c - t < 1e-14 * c) break;
  }
}

cplx LocalSolution::operator()(double t) const {
  if (t <= t_match_ || nodes_.empty()) return series_.value(t);
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t, [](double v, const Node& n) { return v < n.t; });
  if (it == nodes_.end()) return nodes_.back().w;
  const Node& hi = *it;
  const Node& lo = *(it - 1);
  // Quintic Hermite interpolation from values and first two derivatives.
  const double h = hi.t - lo.t;
  const double s = (t - lo.t) / h;
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  const double h0 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
  const double h1 = s - 6 * s3 + 8 * s4 - 3 * s5;
  const double h2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
  const double h3 = 0.5 * s3 - s4 + 0.5 * s5;
  const double h4 = -4 * s3 + 7 * s4 - 3 * s5;
  const double h5 = 10 * s3 - 15 * s4 + 6 * s5;
  return h0 * lo.w + h * h1 * lo.dw + h * h * h2 * lo.ddw + h * h * h3 * hi.ddw + h * h4 * hi.dw + h5 * hi.w;
}

double tail_radius(const SturmLiouvilleOperator& op, const ZeroRecord& zero) {
  double radius = 0.25;
  for (const Interval& iv : localization_plan(op))
    if (std::abs(circle_delta(iv.center, zero.location)) < 1e-9) radius = iv.radius();
  return std::clamp(0.5 * radius, 0.02, 0.1);
}

namespace {

EndpointSolution describe(const std::string& label, SolutionKind kind, const LocalSolution& sol, bool l2_symbolic,
                          double c, const DeficiencyControls& ctl) {
  EndpointSolution e;
  e.label = label;
  e.kind = kind;
  e.exponent = sol.series().exponent;
  e.log_flag = sol.series().has_log();
  e.l2_symbolic = l2_symbolic;
  e.tail = tail_integral_slope([&](double t) { return sol(t); }, c, ctl.eps_hi, ctl.eps_lo);
  return e;
}

}  // namespace

EndpointClassification endpoint_classify(const SturmLiouvilleOperator& op, const ZeroRecord& zero, Side side,
                                         cplx lambda, const DeficiencyControls& ctl) {
  EndpointClassification ec;
  ec.zero = zero;
  ec.side = side;
  ec.lambda = lambda;
  ec.lambda_used = lambda;
  const int n = ctl.series_order;
  const int order = n + zero.order_a + 12;
  const double c = tail_radius(op, zero);
  const double x0 = zero.location;

  auto add_basis = [&](const LocalODE& ode, const FrobeniusBasis& basis) {
    ec.indicial = basis.indicial;
    for (const auto* s : {&basis.first, &basis.second}) {
      LocalSolution sol(*s, op, x0, side, ode.lambda, false, c);
      ec.basis.push_back(describe(s == &basis.first ? "u1" : "u2",
                                  s->has_log() ? SolutionKind::FrobeniusLog : SolutionKind::Frobenius, sol,
                                  l2_near_singularity(s->exponent, s->has_log()), c, ctl));
    }
  };

  if (zero.order_a == 1) {
    const LocalODE ode = expand_operator(op, x0, lambda, order, side);
    add_basis(ode, frobenius_basis(ode, n));
    ec.rule = zero.b_vanishes() ? "simple-zero/log-branch: exponents {0, 0} with a logarithmic partner"
                                : "simple-zero: exponents {0, iB/A}";
  } else if (zero.b_vanishes()) {
    LocalODE ode = expand_operator(op, x0, lambda, order, side);
    if (!is_regular_singular(ode)) {
      // The limit point / limit circle alternative does not depend on lambda.
      ec.lambda_used = 0.0;
      ode = expand_operator(op, x0, 0.0, order, side);
    }
    if (is_regular_singular(ode)) {
      add_basis(ode, frobenius_basis(ode, n));
      ec.rule = "degenerate-zero/b-vanishes/regular: exponent real parts sum to 1 - k";
    } else {
      const IrregularSolution irr = irregular_solution(ode, n);
      LocalSolution sol(irr.series, op, x0, side, ode.lambda, false, c);
      ec.basis.push_back(describe("u", SolutionKind::Irregular, sol, l2_near_singularity(irr.series.exponent, false),
                                  c, ctl));
      ec.rule = "degenerate-zero/b-vanishes/irregular: formal solution t^{-l/2} v(t)";
    }
  } else {
    const OscillatoryPair pair = oscillatory_pair(op, zero, lambda, n, side);
    LocalSolution u1(pair.u1_series, op, x0, side, lambda, false, c);
    LocalSolution u3(pair.u3_series, op, x0, side, lambda, true, c);
    ec.basis.push_back(describe("u1", SolutionKind::Smooth, u1, true, c, ctl));
    // |u2| = |u3 exp(iE)| = |u3| since E is real.
    ec.basis.push_back(describe("u2", SolutionKind::Oscillatory, u3, true, c, ctl));
    ec.rule = "degenerate-zero/b-nonzero: u1 smooth and u2 = u3 exp(iE) with E' = b/a";
  }

  bool sym = true, num = true;
  for (const EndpointSolution& s : ec.basis) {
    sym = sym && s.l2_symbolic;
    num = num && s.l2_numeric();
  }
  ec.verdict = sym ? EndpointVerdict::LimitCircle : EndpointVerdict::LimitPoint;
  ec.numeric_verdict = num ? EndpointVerdict::LimitCircle : EndpointVerdict::LimitPoint;
  return ec;
}

bool interval_esa(const SturmLiouvilleOperator& op, const Interval& interval, const DeficiencyControls& ctl) {
  for (const ZeroRecord& z : op.zeros()) {
    if (std::abs(circle_delta(interval.center, z.location)) > interval.radius()) continue;
    for (cplx lam : {cplx(0.0, 1.0), cplx(0.0, -1.0)})
      for (Side side : {Side::Right, Side::Left})
        if (endpoint_classify(op, z, side, lam, ctl).verdict == EndpointVerdict::LimitCircle) return false;
  }
  return true;
}

DeficiencyEstimate deficiency_estimate(const SturmLiouvilleOperator& op, const DeficiencyControls& ctl) {
  DeficiencyEstimate est;
  for (const ZeroRecord& z : op.zeros()) {
    ZeroDeficiency zd;
    zd.zero = z;
    for (cplx lam : {cplx(0.0, 1.0), cplx(0.0, -1.0)}) {
      for (Side side : {Side::Right, Side::Left}) {
        EndpointClassification ec = endpoint_classify(op, z, side, lam, ctl);
        if (ec.verdict == EndpointVerdict::LimitCircle) (lam.imag() > 0 ? zd.lc_sides_minus : zd.lc_sides_plus)++;
        zd.cells.push_back(std::move(ec));
      }
    }
    est.n_plus += std::max(0, zd.lc_sides_plus - 1);
    est.n_minus += std::max(0, zd.lc_sides_minus - 1);
    est.per_zero.push_back(std::move(zd));
  }
  return est;
}

CrossValidation cross_validate(const SturmLiouvilleOperator& op, const DeficiencyControls& ctl) {
  CrossValidation cv;
  const EsaResult esa = is_esa(op);
  cv.report = esa.report;
  cv.deficiency = deficiency_estimate(op, ctl);
  cv.classifier_esa = esa.esa;
  cv.deficiency_esa = cv.deficiency.esa();
  cv.agreement = cv.classifier_esa == cv.deficiency_esa;
  if (!cv.agreement)
    cv.differences.push_back("classifier esa=" + std::string(cv.classifier_esa ? "true" : "false") +
                             " but deficiency indices (" + std::to_string(cv.deficiency.n_plus) + ", " +
                             std::to_string(cv.deficiency.n_minus) + ")");
  for (const ZeroDeficiency& zd : cv.deficiency.per_zero) {
    for (const EndpointClassification& ec : zd.cells) {
      if (ec.agrees()) continue;
      cv.symbolic_numeric_agreement = false;
      cv.differences.push_back("zero " + std::to_string(zd.zero.location) + " " + to_string(ec.side) +
                               " lambda " + std::to_string(ec.lambda.imag()) + "i: symbolic " + to_string(ec.verdict) +
                               ", numeric " + to_string(ec.numeric_verdict));
    }
  }
  return cv;
}

}  // namespace complab
