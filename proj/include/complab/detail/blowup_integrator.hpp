#pragma once

// Adaptive Dormand-Prince integration of an autonomous field with cap-crossing
// bookkeeping, shared by the 1-D symbol flow and the Lorentz geodesic flow.
//
// Phase 1 integrates in time. Once size(y) reaches the first cap the run
// switches to the arclength field F / sqrt(1 + |F|^2) with t carried as an
// extra state component, so that a finite-time escape becomes a regular
// curve in the new parameter. Crossing times of every cap are located by
// bisection on a single Dormand-Prince step.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include <boost/numeric/odeint.hpp>

namespace complab::detail {

enum class RunStatus { Horizon, Capped, Underflow };

template <std::size_t N>
struct RunResult {
  std::vector<double> t;
  std::vector<std::array<double, N>> y;
  RunStatus status = RunStatus::Horizon;
  std::vector<double> caps;        // caps that were crossed, in order
  std::vector<double> cross_times;  // matching crossing times
};

struct RunControls {
  double t_max = 1e3;
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  std::vector<double> caps;  // increasing; run stops after the last one
  std::size_t max_steps = 4'000'000;
};

template <std::size_t M>
bool finite_state(const std::array<double, M>& y) {
  for (double v : y)
    if (!std::isfinite(v)) return false;
  return true;
}

// Bisect on the step length h in (0, h_hi] until size(advance(h)) hits target.
template <std::size_t M, class Sys, class Size>
double locate_crossing(Sys& sys, const std::array<double, M>& y0, double h_hi, double target, Size size,
                       std::array<double, M>& y_at) {
  namespace ode = boost::numeric::odeint;
  using state = std::array<double, M>;
  ode::runge_kutta_dopri5<state> rk;
  state dydx0{}, dydx1{};
  sys(y0, dydx0, 0.0);
  double lo = 0.0, hi = h_hi;
  state y_mid{};
  for (int it = 0; it < 80 && hi - lo > 1e-15 * std::max(1.0, h_hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    rk.do_step(sys, y0, dydx0, 0.0, y_mid, dydx1, mid);
    if (size(y_mid) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  rk.do_step(sys, y0, dydx0, 0.0, y_at, dydx1, hi);
  return hi;
}

/// field(y, dydt), size(y) -> double, in_domain(y) -> bool.
template <std::size_t N, class Field, class Size, class Domain>
RunResult<N> run_blowup(Field field, Size size, Domain in_domain, const std::array<double, N>& y0,
                        const RunControls& ctl) {
  namespace ode = boost::numeric::odeint;
  using state = std::array<double, N>;
  using ext = std::array<double, N + 1>;

  RunResult<N> out;
  out.t.push_back(0.0);
  out.y.push_back(y0);
  std::size_t next_cap = 0;
  while (next_cap < ctl.caps.size() && size(y0) >= ctl.caps[next_cap]) ++next_cap;
  if (next_cap == ctl.caps.size() && !ctl.caps.empty()) {
    out.status = RunStatus::Capped;
    return out;
  }

  auto sys1 = [&](const state& y, state& dy, double) { field(y, dy); };
  auto stepper1 = ode::make_controlled(ctl.abs_tol, ctl.rel_tol, ode::runge_kutta_dopri5<state>());

  double t = 0.0;
  state y = y0, dydt{}, y_new{}, dydt_new{};
  sys1(y, dydt, t);
  double dt = std::min(1e-3, 0.01 * ctl.t_max);
  std::size_t steps = 0;
  bool switched = next_cap > 0;

  while (!switched && ctl.t_max - t > 1e-13 * std::max(1.0, ctl.t_max)) {
    if (++steps > ctl.max_steps) {
      out.status = RunStatus::Underflow;
      return out;
    }
    if (dt < 1e-14 * std::max(1.0, std::abs(t))) {
      out.status = RunStatus::Underflow;
      return out;
    }
    double h = std::min(dt, ctl.t_max - t);
    double t_try = t;
    const auto res = stepper1.try_step(sys1, y, dydt, t_try, y_new, dydt_new, h);
    if (res == ode::fail) {
      dt = h;
      continue;
    }
    if (!finite_state<N>(y_new) || !in_domain(y_new)) {
      dt = 0.5 * (t_try - t);
      continue;
    }
    const double h_taken = t_try - t;
    if (next_cap < ctl.caps.size() && size(y_new) >= ctl.caps[next_cap]) {
      while (next_cap < ctl.caps.size() && size(y_new) >= ctl.caps[next_cap]) {
        state y_at{};
        const double hc = locate_crossing<N>(sys1, y, h_taken, ctl.caps[next_cap], size, y_at);
        out.caps.push_back(ctl.caps[next_cap]);
        out.cross_times.push_back(t + hc);
        ++next_cap;
      }
      switched = true;
    }
    t = t_try;
    y = y_new;
    dydt = dydt_new;
    dt = h;
    out.t.push_back(t);
    out.y.push_back(y);
    if (next_cap == ctl.caps.size() && !ctl.caps.empty()) {
      out.status = RunStatus::Capped;
      return out;
    }
  }
  if (!switched) return out;

  // Arclength phase.
  auto sys2 = [&](const ext& Y, ext& dY, double) {
    state yy{}, f{};
    for (std::size_t i = 0; i < N; ++i) yy[i] = Y[i];
    field(yy, f);
    double norm2 = 0.0;
    for (double v : f) norm2 += v * v;
    const double w = 1.0 / std::sqrt(1.0 + norm2);
    for (std::size_t i = 0; i < N; ++i) dY[i] = f[i] * w;
    dY[N] = w;
  };
  auto ext_size = [&](const ext& Y) {
    state yy{};
    for (std::size_t i = 0; i < N; ++i) yy[i] = Y[i];
    return size(yy);
  };
  auto ext_domain = [&](const ext& Y) {
    state yy{};
    for (std::size_t i = 0; i < N; ++i) yy[i] = Y[i];
    return in_domain(yy);
  };
  auto stepper2 = ode::make_controlled(ctl.abs_tol, ctl.rel_tol, ode::runge_kutta_dopri5<ext>());
  ext Y{}, dY{}, Y_new{}, dY_new{};
  for (std::size_t i = 0; i < N; ++i) Y[i] = y[i];
  Y[N] = t;
  double s = 0.0;
  sys2(Y, dY, s);
  double ds = 1e-3 * std::max(1.0, size(y)) / std::max(1.0, ctl.caps.empty() ? 1.0 : ctl.caps.front());
  ds = std::max(ds, 1e-8);

  while (Y[N] < ctl.t_max) {
    if (++steps > ctl.max_steps || ds < 1e-14 * std::max(1.0, std::abs(s))) {
      out.status = RunStatus::Underflow;
      return out;
    }
    double s_try = s;
    double h = ds;
    const auto res = stepper2.try_step(sys2, Y, dY, s_try, Y_new, dY_new, h);
    if (res == ode::fail) {
      ds = h;
      continue;
    }
    if (!finite_state<N + 1>(Y_new) || !ext_domain(Y_new)) {
      ds = 0.5 * (s_try - s);
      continue;
    }
    const double h_taken = s_try - s;
    if (Y_new[N] > ctl.t_max) {
      // Shorten the step to land on the horizon.
      const double frac = (ctl.t_max - Y[N]) / (Y_new[N] - Y[N]);
      if (frac * h_taken < 1e-14 * std::max(1.0, std::abs(s)) || ctl.t_max - Y[N] < 1e-12 * ctl.t_max) break;
      ds = 0.999 * frac * h_taken;
      continue;
    }
    while (next_cap < ctl.caps.size() && ext_size(Y_new) >= ctl.caps[next_cap]) {
      ext Y_at{};
      locate_crossing<N + 1>(sys2, Y, h_taken, ctl.caps[next_cap], ext_size, Y_at);
      out.caps.push_back(ctl.caps[next_cap]);
      out.cross_times.push_back(Y_at[N]);
      ++next_cap;
    }
    s = s_try;
    Y = Y_new;
    dY = dY_new;
    ds = h;
    state yy{};
    for (std::size_t i = 0; i < N; ++i) yy[i] = Y[i];
    out.t.push_back(Y[N]);
    out.y.push_back(yy);
    if (next_cap == ctl.caps.size()) {
      out.status = RunStatus::Capped;
      return out;
    }
  }
  return out;
}

struct CrossingAnalysis {
  bool cauchy = false;
  double estimate = 0.0;
  double uncertainty = 0.0;
};

/// Cauchy test and Aitken extrapolation on the last three crossing times.
/// Finite-time escape makes successive increments shrink geometrically;
/// exponential growth in infinite time keeps them roughly constant.
inline CrossingAnalysis analyse_crossings(const std::vector<double>& times) {
  CrossingAnalysis a;
  const std::size_t n = times.size();
  if (n < 3) return a;
  const double d2 = times[n - 2] - times[n - 3];
  const double d3 = times[n - 1] - times[n - 2];
  bool shrinking = d3 > 0.0 && d2 / d3 >= 1.2;
  if (n >= 4) {
    const double d1 = times[n - 3] - times[n - 4];
    shrinking = shrinking && d1 / d2 >= 1.2;
  }
  a.cauchy = shrinking;
  a.uncertainty = std::abs(d3);
  const double denom = d3 - d2;
  a.estimate = denom != 0.0 ? times[n - 1] - d3 * d3 / denom : times[n - 1];
  return a;
}

}  // namespace complab::detail
