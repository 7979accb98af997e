#include "complab/lorentz.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "complab/detail/blowup_integrator.hpp"
#include "complab/errors.hpp"

namespace complab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Grad {
  double h = 0.0, hx = 0.0, hy = 0.0, hxi = 0.0, heta = 0.0;
  double scale = 0.0;  // sum of |monomials| in h
};

Grad gradient(const LorentzModel& m, const CotangentState& s) {
  Grad g;
  switch (m.kind) {
    case LorentzKind::CliftonPohl: {
      const double f = s.x * s.x + s.y * s.y;
      g.h = f * s.xi * s.eta;
      g.hx = 2.0 * s.x * s.xi * s.eta;
      g.hy = 2.0 * s.y * s.xi * s.eta;
      g.hxi = f * s.eta;
      g.heta = f * s.xi;
      g.scale = std::abs(g.h);
      break;
    }
    case LorentzKind::NormalForm: {
      const double a = m.a_profile(s.y), da = m.a_profile.derivative_at(s.y, 1);
      g.h = -s.eta * (a * s.eta + s.xi);
      g.hy = -da * s.eta * s.eta;
      g.hxi = -s.eta;
      g.heta = -(2.0 * a * s.eta + s.xi);
      g.scale = std::abs(a * s.eta * s.eta) + std::abs(s.eta * s.xi);
      break;
    }
    case LorentzKind::SimpleQuotient: {
      g.h = s.xi * s.eta;
      g.hxi = s.eta;
      g.heta = s.xi;
      g.scale = std::abs(g.h);
      break;
    }
  }
  if (m.phi) {
    double phi = m.phi->constant, px = 0.0, py = 0.0;
    if (m.kind == LorentzKind::NormalForm) {
      phi += m.phi->amplitude * std::sin(kTwoPi * s.x);
      px = m.phi->amplitude * kTwoPi * std::cos(kTwoPi * s.x);
    } else {
      const double r = std::hypot(s.x, s.y);
      const double r3 = r * r * r;
      phi += m.phi->amplitude * s.y / r;
      px = -m.phi->amplitude * s.x * s.y / r3;
      py = m.phi->amplitude * s.x * s.x / r3;
    }
    const double w = std::exp(-phi);
    g.hx = w * (g.hx - g.h * px);
    g.hy = w * (g.hy - g.h * py);
    g.hxi *= w;
    g.heta *= w;
    g.h *= w;
    g.scale *= w;
  }
  return g;
}

CotangentState from_array(const std::array<double, 4>& y) { return {y[0], y[1], y[2], y[3]}; }

}  // namespace

std::string to_string(LorentzKind k) {
  switch (k) {
    case LorentzKind::CliftonPohl: return "CliftonPohl";
    case LorentzKind::NormalForm: return "NormalForm";
    case LorentzKind::SimpleQuotient: return "SimpleQuotient";
  }
  return "CliftonPohl";
}

LorentzKind lorentz_kind_from_string(const std::string& s) {
  if (s == "CliftonPohl") return LorentzKind::CliftonPohl;
  if (s == "NormalForm") return LorentzKind::NormalForm;
  if (s == "SimpleQuotient") return LorentzKind::SimpleQuotient;
  throw std::invalid_argument("unknown Lorentz model: " + s);
}

LorentzModel LorentzModel::clifton_pohl() { return {}; }

LorentzModel LorentzModel::simple_quotient() {
  LorentzModel m;
  m.kind = LorentzKind::SimpleQuotient;
  return m;
}

LorentzModel LorentzModel::normal_form(TrigPoly a_profile) {
  LorentzModel m;
  m.kind = LorentzKind::NormalForm;
  m.a_profile = std::move(a_profile);
  if (m.a_profile.is_zero()) throw NumericError(ErrorCode::IdenticallyZero, "normal-form profile vanishes");
  m.profile_order = zero_order(m.a_profile, 0.0).k;
  return m;
}

LorentzModel LorentzModel::normal_form_power(int k) {
  if (k < 0) throw std::invalid_argument("normal_form_power: negative order");
  return normal_form(TrigPoly::sine(1, 1.0 / kTwoPi).pow(k));
}

LorentzModel LorentzModel::wrapped(ConformalFactor f) const {
  LorentzModel m = *this;
  if (m.phi) {
    m.phi->constant += f.constant;
    m.phi->amplitude += f.amplitude;
  } else {
    m.phi = f;
  }
  return m;
}

std::string LorentzModel::variant_name() const { return is_wrap() ? "ConformalWrap" : to_string(kind); }

double dual_hamiltonian(const LorentzModel& m, const CotangentState& s) { return gradient(m, s).h; }

std::array<double, 4> hamiltonian_field(const LorentzModel& m, const CotangentState& s) {
  const Grad g = gradient(m, s);
  return {g.hxi, g.heta, -g.hx, -g.hy};
}

double Trajectory4D::drift_until(double t_end) const {
  if (samples.empty()) return 0.0;
  double drift = 0.0;
  const LorentzSample& first = samples.front();
  for (const LorentzSample& s : samples) {
    if (s.t > t_end) break;
    const double scale = std::max(first.scale, s.scale);
    if (scale > 0.0) drift = std::max(drift, std::abs(s.h - first.h) / scale);
  }
  return drift;
}

Trajectory4D geodesic_integrate(const LorentzModel& m, const CotangentState& init, double t_max,
                                const FlowControls& controls) {
  if (!(t_max > 0.0)) throw std::invalid_argument("geodesic_integrate: t_max must be positive");
  const double dir = controls.direction < 0 ? -1.0 : 1.0;
  auto field = [&](const std::array<double, 4>& y, std::array<double, 4>& dy) {
    dy = hamiltonian_field(m, from_array(y));
    for (double& v : dy) v *= dir;
  };
  auto size = [&](const std::array<double, 4>& y) {
    double s = std::max({std::abs(y[0]), std::abs(y[1]), std::abs(y[2]), std::abs(y[3])});
    if (m.kind == LorentzKind::CliftonPohl) s = std::max(s, 1.0 / std::hypot(y[0], y[1]));
    if (m.kind == LorentzKind::SimpleQuotient) s = std::max(s, 1.0 / y[0]);
    return s;
  };
  auto domain = [&](const std::array<double, 4>& y) {
    if (m.kind == LorentzKind::CliftonPohl) return std::hypot(y[0], y[1]) > 0.0;
    if (m.kind == LorentzKind::SimpleQuotient) return y[0] > 0.0;
    return true;
  };
  if (!domain({init.x, init.y, init.xi, init.eta}))
    throw std::invalid_argument("geodesic_integrate: initial point outside the model chart");

  detail::RunControls rc;
  rc.t_max = t_max;
  rc.rel_tol = controls.rel_tol;
  rc.abs_tol = controls.abs_tol;
  rc.caps = default_caps(controls.xi_cap);
  const auto res = detail::run_blowup<4>(field, size, domain, {init.x, init.y, init.xi, init.eta}, rc);

  Trajectory4D tr;
  const Grad g0 = gradient(m, init);
  tr.h_initial = g0.h;
  double drift = 0.0;
  for (std::size_t i = 0; i < res.t.size(); ++i) {
    const CotangentState s = from_array(res.y[i]);
    const Grad g = gradient(m, s);
    tr.samples.push_back({res.t[i], s, g.h, g.scale});
    const double scale = std::max(g0.scale, g.scale);
    if (scale > 0.0) drift = std::max(drift, std::abs(g.h - g0.h) / scale);
  }
  tr.h_drift = drift / std::max(1.0, res.t.back());
  switch (res.status) {
    case detail::RunStatus::Horizon: tr.status = FlowStatus::CompletedHorizon; break;
    case detail::RunStatus::Underflow: tr.status = FlowStatus::StepUnderflow; break;
    case detail::RunStatus::Capped: {
      const auto an = detail::analyse_crossings(res.cross_times);
      tr.status = an.cauchy ? FlowStatus::Blowup : FlowStatus::GrowthCapped;
      if (an.cauchy) tr.escape = EscapeEstimate{an.estimate, an.uncertainty, res.caps, res.cross_times};
      break;
    }
  }
  return tr;
}

SturmLiouvilleOperator separation_reduce(const LorentzModel& m, int mode) {
  if (m.kind != LorentzKind::NormalForm) throw std::invalid_argument("separation_reduce: needs a normal-form model");
  return {m.a_profile, TrigPoly::constant_fn(-kTwoPi * mode)};
}

LorentzVerdict lorentz_esa_verdict(const LorentzModel& m) {
  const SturmLiouvilleOperator op = separation_reduce(m, 1);
  const EsaResult r = is_esa(op);
  return {r.esa, 1, op.summary(), r.report};
}

namespace {

struct Point {
  double x, y;
};

// Position-space path from the start until it first leaves the window,
// densified with cubic Hermite segments built from the sampled velocities and
// clipped at the window boundary.
std::vector<Point> dense_path(const LorentzModel& m, const Trajectory4D& tr, double window) {
  std::vector<Point> pts;
  auto excess = [&](const Point& p) { return std::max(std::abs(p.x), std::abs(p.y)) - window; };
  constexpr int kSub = 32;
  for (std::size_t i = 0; i + 1 < tr.samples.size(); ++i) {
    const LorentzSample& a = tr.samples[i];
    const LorentzSample& b = tr.samples[i + 1];
    const auto va = hamiltonian_field(m, a.s), vb = hamiltonian_field(m, b.s);
    const double dt = b.t - a.t;
    auto at = [&](double u) {
      const double h00 = 2 * u * u * u - 3 * u * u + 1, h10 = u * u * u - 2 * u * u + u;
      const double h01 = -2 * u * u * u + 3 * u * u, h11 = u * u * u - u * u;
      return Point{h00 * a.s.x + h10 * dt * va[0] + h01 * b.s.x + h11 * dt * vb[0],
                   h00 * a.s.y + h10 * dt * va[1] + h01 * b.s.y + h11 * dt * vb[1]};
    };
    if (excess(at(0.0)) > 0.0) break;
    double u_end = 1.0;
    const bool leaves = excess(at(1.0)) > 0.0;
    if (leaves) {
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (excess(at(mid)) > 0.0 ? hi : lo) = mid;
      }
      u_end = lo;
    }
    for (int j = 0; j < kSub; ++j) {
      const double u = u_end * j / kSub;
      pts.push_back(at(u));
    }
    if (leaves || i + 2 == tr.samples.size()) {
      pts.push_back(at(u_end));
      break;
    }
  }
  return pts;
}

double point_segment(const Point& p, const Point& a, const Point& b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double u = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  return std::hypot(p.x - a.x - u * dx, p.y - a.y - u * dy);
}

double one_sided(const std::vector<Point>& from, const std::vector<Point>& to) {
  if (from.empty()) return 0.0;
  if (to.size() < 2) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const Point& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < to.size(); ++j) best = std::min(best, point_segment(p, to[j], to[j + 1]));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

ConformalCheck conformal_null_check(const LorentzModel& base, const ConformalFactor& phi, const CotangentState& init,
                                    double t_max, double window, const FlowControls& controls) {
  const LorentzModel wrap = base.wrapped(phi);
  // Along the null set the wrapped flow runs at e^{-phi} times the base speed.
  const double phi_max = phi.constant + std::abs(phi.amplitude);
  const double phi_min = phi.constant - std::abs(phi.amplitude);
  Trajectory4D a = geodesic_integrate(base, init, t_max, controls);
  const Trajectory4D b = geodesic_integrate(wrap, init, t_max * std::exp(phi_max), controls);
  if (b.incomplete() && !a.incomplete())
    a = geodesic_integrate(base, init, t_max * std::exp(phi_max - phi_min), controls);
  ConformalCheck out;
  out.base_status = a.status;
  out.wrap_status = b.status;
  out.same_verdict = a.incomplete() == b.incomplete();
  const auto pa = dense_path(base, a, window);
  const auto pb = dense_path(wrap, b, window);
  out.compared_points = pa.size() + pb.size();
  // A completed base run covers a sub-arc of the wrapped one.
  if (out.same_verdict && !a.incomplete())
    out.hausdorff = one_sided(pa, pb);
  else
    out.hausdorff = std::max(one_sided(pa, pb), one_sided(pb, pa));
  if (a.escape && b.escape) out.escape_ratio = b.escape->estimate / a.escape->estimate;
  return out;
}

TestFunction TestFunction::gaussian(double center, double width) {
  TestFunction f;
  f.v = [=](double y) {
    const double z = (y - center) / width;
    return std::exp(-0.5 * z * z);
  };
  f.dv = [=](double y) {
    const double z = (y - center) / width;
    return -z / width * std::exp(-0.5 * z * z);
  };
  f.d2v = [=](double y) {
    const double z = (y - center) / width;
    return (z * z - 1.0) / (width * width) * std::exp(-0.5 * z * z);
  };
  return f;
}

TestFunction TestFunction::zero() {
  auto z = [](double) { return 0.0; };
  return {z, z, z};
}

LaplacianCheck laplacian_mode_identity_check(const LorentzModel& m, const TestFunction& v, int mode, double h) {
  using cplx = std::complex<double>;
  const SturmLiouvilleOperator op = separation_reduce(m, mode);
  const TrigPoly& a = op.a();
  const TrigPoly& b = op.b();
  const cplx I(0.0, 1.0);
  auto U = [&](double x, double y) { return std::exp(I * (kTwoPi * mode * x)) * v.v(y); };

  auto residual = [&](double hh) {
    double worst = 0.0;
    for (double x : {0.0, 0.21, 0.37}) {
      for (int j = 0; j <= 80; ++j) {
        const double y = -0.3 + 0.6 * j / 80.0;
        const cplx u0 = U(x, y);
        const cplx dyy = (a(y + 0.5 * hh) * (U(x, y + hh) - u0) - a(y - 0.5 * hh) * (u0 - U(x, y - hh))) / (hh * hh);
        const cplx dxy = (U(x + hh, y + hh) - U(x + hh, y - hh) - U(x - hh, y + hh) + U(x - hh, y - hh)) / (4 * hh * hh);
        const cplx pv = a.derivative_at(y, 1) * v.dv(y) + a(y) * v.d2v(y) - I * b(y) * v.dv(y) -
                        0.5 * I * b.derivative_at(y, 1) * v.v(y);
        const cplx exact = std::exp(I * (kTwoPi * mode * x)) * pv;
        worst = std::max(worst, std::abs(dyy + dxy - exact));
      }
    }
    return worst;
  };

  LaplacianCheck out;
  out.h = h;
  out.residual_h = residual(h);
  out.residual_h2 = residual(0.5 * h);
  out.order = out.residual_h2 > 0.0 ? std::log2(out.residual_h / out.residual_h2)
                                    : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace complab
