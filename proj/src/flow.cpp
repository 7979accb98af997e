#include "complab/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

#include "complab/detail/blowup_integrator.hpp"
#include "complab/errors.hpp"

namespace complab {

FieldValue vector_field(const SturmLiouvilleOperator& op, const PhasePoint& s) {
  const double a = op.a()(s.x), b = op.b()(s.x);
  const double da = op.a().derivative_at(s.x, 1), db = op.b().derivative_at(s.x, 1);
  return {-2.0 * a * s.xi + b, da * s.xi * s.xi - db * s.xi};
}

double symbol_value(const SturmLiouvilleOperator& op, const PhasePoint& s) { return op.symbol(s.x, s.xi); }

std::string to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::CompletedHorizon: return "CompletedHorizon";
    case FlowStatus::Blowup: return "Blowup";
    case FlowStatus::StepUnderflow: return "StepUnderflow";
    case FlowStatus::GrowthCapped: return "GrowthCapped";
  }
  return "CompletedHorizon";
}

FlowStatus flow_status_from_string(const std::string& s) {
  if (s == "CompletedHorizon") return FlowStatus::CompletedHorizon;
  if (s == "Blowup") return FlowStatus::Blowup;
  if (s == "StepUnderflow") return FlowStatus::StepUnderflow;
  if (s == "GrowthCapped") return FlowStatus::GrowthCapped;
  throw std::invalid_argument("unknown flow status: " + s);
}

std::vector<double> default_caps(double xi_cap) { return {xi_cap * 1e-3, xi_cap * 1e-2, xi_cap * 1e-1, xi_cap}; }

namespace {

Trajectory run(const SturmLiouvilleOperator& op, const PhasePoint& init, double t_max, const FlowControls& ctl,
               std::vector<double> caps) {
  if (!(t_max > 0.0)) throw std::invalid_argument("integrate: t_max must be positive");
  const TrigPoly da = op.a().derivative(1);
  const TrigPoly db = op.b().derivative(1);
  const double dir = ctl.direction < 0 ? -1.0 : 1.0;
  auto field = [&](const std::array<double, 2>& y, std::array<double, 2>& dy) {
    const double a = op.a()(y[0]), b = op.b()(y[0]);
    dy[0] = dir * (-2.0 * a * y[1] + b);
    dy[1] = dir * (da(y[0]) * y[1] * y[1] - db(y[0]) * y[1]);
  };
  auto size = [](const std::array<double, 2>& y) { return std::abs(y[1]); };
  auto domain = [](const std::array<double, 2>&) { return true; };

  detail::RunControls rc;
  rc.t_max = t_max;
  rc.rel_tol = ctl.rel_tol;
  rc.abs_tol = ctl.abs_tol;
  rc.caps = std::move(caps);
  const auto res = detail::run_blowup<2>(field, size, domain, {init.x, init.xi}, rc);

  Trajectory tr;
  tr.caps = res.caps;
  tr.crossing_times = res.cross_times;
  const double p0 = op.symbol(init.x, init.xi);
  const double scale0 = std::abs(op.a()(init.x)) * init.xi * init.xi + std::abs(op.b()(init.x) * init.xi);
  double drift = 0.0;
  for (std::size_t i = 0; i < res.t.size(); ++i) {
    const PhasePoint s{res.y[i][0], res.y[i][1]};
    tr.samples.push_back({res.t[i], s});
    tr.max_abs_xi = std::max(tr.max_abs_xi, std::abs(s.xi));
    const double a = op.a()(s.x), b = op.b()(s.x);
    const double scale = std::max(scale0, std::abs(a) * s.xi * s.xi + std::abs(b * s.xi));
    const double p = -a * s.xi * s.xi + b * s.xi;
    if (scale > 0.0) drift = std::max(drift, std::abs(p - p0) / scale);
  }
  tr.p_drift = drift / std::max(1.0, res.t.back());

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

}  // namespace

Trajectory integrate(const SturmLiouvilleOperator& op, const PhasePoint& init, double t_max,
                     const FlowControls& controls) {
  return run(op, init, t_max, controls, default_caps(controls.xi_cap));
}

EscapeEstimate escape_time(const SturmLiouvilleOperator& op, const PhasePoint& init, const std::vector<double>& caps,
                           double t_max, const FlowControls& controls) {
  if (caps.size() < 3 || !std::is_sorted(caps.begin(), caps.end()))
    throw std::invalid_argument("escape_time: need at least three increasing caps");
  const Trajectory tr = run(op, init, t_max, controls, caps);
  if (tr.status != FlowStatus::Blowup || !tr.escape)
    throw NumericError(ErrorCode::NoBlowupDetected, "trajectory ended with status " + to_string(tr.status));
  return *tr.escape;
}

PhasePoint null_branch_init(const SturmLiouvilleOperator& op, double x0, NullBranch branch) {
  if (branch == NullBranch::Zero) return {x0, 0.0};
  const double a = op.a()(x0);
  if (std::abs(a) <= op.tolerances().zero * op.a().max_coeff())
    throw NumericError(ErrorCode::DivisionAtZero, "a vanishes at the requested graph-branch seed");
  return {x0, op.b()(x0) / a};
}

FlowVerdict completeness_probe(const SturmLiouvilleOperator& op, const ProbeGrid& grid, double t_max,
                               const FlowControls& controls) {
  std::vector<double> zs;
  for (const ZeroRecord& z : op.zeros()) zs.push_back(z.location);
  double gap = 1.0;
  for (std::size_t i = 0; i + 1 < zs.size(); ++i) gap = std::min(gap, zs[i + 1] - zs[i]);
  if (zs.size() > 1) gap = std::min(gap, zs.front() + 1.0 - zs.back());

  std::vector<std::pair<double, NullBranch>> seeds;
  for (double z : zs)
    for (double o : grid.offsets)
      for (double sign : {-1.0, 1.0})
        for (NullBranch br : {NullBranch::Zero, NullBranch::Graph}) seeds.emplace_back(z + sign * o * gap, br);
  std::mt19937 rng(grid.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < grid.random_seeds; ++i) {
    const double x = unit(rng);
    seeds.emplace_back(x, unit(rng) < 0.5 ? NullBranch::Zero : NullBranch::Graph);
  }

  FlowVerdict verdict;
  for (const auto& [x, br] : seeds) {
    PhasePoint init;
    try {
      init = null_branch_init(op, x, br);
    } catch (const NumericError&) {
      continue;
    }
    for (int dir : {1, -1}) {
      FlowControls c = controls;
      c.direction = dir;
      const Trajectory tr = integrate(op, init, t_max, c);
      ProbeRun r{init, br, dir, tr.status, tr.max_abs_xi, tr.p_drift, tr.escape};
      if (tr.incomplete()) {
        verdict.complete_evidence = false;
        if (!verdict.witness) verdict.witness = r;
      } else if (tr.status == FlowStatus::CompletedHorizon) {
        verdict.max_abs_xi = std::max(verdict.max_abs_xi, tr.max_abs_xi);
      }
      verdict.runs.push_back(std::move(r));
    }
  }
  return verdict;
}

}  // namespace complab
