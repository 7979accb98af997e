// Acceptance criteria 1-11: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "complab/classifier.hpp"
#include "complab/deficiency.hpp"
#include "complab/errors.hpp"
#include "complab/flow.hpp"
#include "complab/frobenius.hpp"
#include "complab/lorentz.hpp"

using namespace complab;
using std::numbers::pi;

namespace {

const TrigPoly kHalf(0.5, {-0.5}, {});
const TrigPoly kQuartic(3.0 / 8.0, {-0.5, 0.125}, {});
const TrigPoly kOne = TrigPoly::constant_fn(1.0);
const TrigPoly kSin = TrigPoly::sine(1);
const cplx kI(0.0, 1.0);

struct GalleryOp {
  std::string name;
  SturmLiouvilleOperator op;
  bool complete;
  bool esa;
};

std::vector<GalleryOp> gallery() {
  return {{"E1", {kSin, kOne}, false, false},      {"E2", {kHalf, TrigPoly()}, true, true},
          {"E3", {kHalf, kOne}, false, false},     {"E4", {kHalf, kSin}, true, true},
          {"E5", {kQuartic, kSin}, true, true},    {"E6", {kOne, kSin}, true, true}};
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void report(int id, const std::string& title, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  std::printf("%s criterion %d: %s (%.2f s)%s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), seconds_since(t0),
              o.detail.str().c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

const std::vector<double> kResidualH{std::pow(10.0, -1.5), 1e-2, std::pow(10.0, -2.5)};

// Every series the pipelines build at one endpoint, paired with its equation.
std::vector<std::pair<FrobeniusSeries, LocalODE>> endpoint_series(const SturmLiouvilleOperator& op,
                                                                  const ZeroRecord& z, Side side, cplx lambda,
                                                                  int n) {
  std::vector<std::pair<FrobeniusSeries, LocalODE>> out;
  const int order = n + z.order_a + 12;
  if (z.order_a == 1 || z.b_vanishes()) {
    LocalODE ode = expand_operator(op, z.location, lambda, order, side);
    if (!is_regular_singular(ode)) ode = expand_operator(op, z.location, 0.0, order, side);
    if (is_regular_singular(ode)) {
      const FrobeniusBasis b = frobenius_basis(ode, n);
      out.emplace_back(b.first, ode);
      out.emplace_back(b.second, ode);
    } else {
      out.emplace_back(irregular_solution(ode, n).series, ode);
    }
  } else {
    for (bool flip : {false, true}) {
      const LocalODE ode = expand_operator(op, z.location, lambda, order, side, flip);
      out.emplace_back(smooth_solution(ode, n), ode);
    }
  }
  return out;
}

TrigPoly random_trig(std::mt19937& rng, double c0, double amp, int degree) {
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<double> c(degree), s(degree);
  for (int i = 0; i < degree; ++i) {
    c[i] = u(rng);
    s[i] = u(rng);
  }
  return TrigPoly(c0, c, s);
}

}  // namespace

int main() {
  const int kN = 20;
  std::vector<std::pair<SturmLiouvilleOperator, double>> residual_pool;  // extra operators for criterion 5
  double max_drift_seen = 0.0;
  int drift_runs = 0;
  auto note_drift = [&](double d) {
    max_drift_seen = std::max(max_drift_seen, d);
    ++drift_runs;
  };

  report(1, "classifier verdicts on E1..E6", [&](Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    for (const GalleryOp& g : gallery()) {
      const EsaResult r = is_esa(g.op);
      o.require(r.report.classical == g.complete && r.report.quantum == g.esa, g.name);
      o.detail << ' ' << g.name << ":(" << (r.report.classical ? 'T' : 'F') << ',' << (r.report.quantum ? 'T' : 'F')
               << ')';
    }
    const double dt = seconds_since(t0);
    o.require(dt < 1.0, "runtime " + std::to_string(dt) + " s");
  });

  report(2, "flow probe agrees with classifier; E1 escape times", [&](Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    for (const GalleryOp& g : gallery()) {
      const FlowVerdict v = completeness_probe(g.op);
      o.require(v.complete_evidence == g.complete, g.name);
      for (const ProbeRun& r : v.runs)
        if (r.status == FlowStatus::CompletedHorizon) note_drift(r.p_drift);
    }
    const SturmLiouvilleOperator e1(kSin, kOne);
    for (double x0 : {0.1, 0.2, 0.4}) {
      const EscapeEstimate e = escape_time(e1, null_branch_init(e1, x0, NullBranch::Graph), default_caps(1e6));
      o.detail << " x0=" << x0 << "->" << e.estimate;
      o.require(std::abs(e.estimate - x0) <= 0.01 * x0, "escape at x0=" + std::to_string(x0));
    }
    const double dt = seconds_since(t0);
    o.require(dt < 30.0, "runtime " + std::to_string(dt) + " s");
  });

  report(3, "simple-zero indicial roots {0, i b/a'} on 20 random operators", [&](Outcome& o) {
    std::mt19937 rng(20240601);
    std::uniform_real_distribution<double> loc(0.0, 1.0);
    double worst = 0.0;
    int count = 0;
    while (count < 20) {
      const double x0 = loc(rng);
      // a = sin(2 pi (x - x0)) g with g > 0, so x0 is a simple zero.
      const TrigPoly g = random_trig(rng, 1.0, 0.2, 2);
      const TrigPoly a = TrigPoly::sine(1).shifted(-x0) * g;
      const TrigPoly b = random_trig(rng, 0.0, 1.0, 2);
      const SturmLiouvilleOperator op(a, b);
      for (const ZeroRecord& z : op.zeros()) {
        if (std::abs(circle_delta(z.location, x0)) > 1e-8) continue;
        o.require(z.order_a == 1, "zero order");
        const IndicialEquation e = indicial_equation(expand_operator(op, z.location, kI, kN + 13));
        const cplx target = kI * z.b_value / z.a_lead;
        const double err = std::min(std::max(std::abs(e.r1), std::abs(e.r2 - target)),
                                    std::max(std::abs(e.r2), std::abs(e.r1 - target)));
        worst = std::max(worst, err);
        residual_pool.emplace_back(op, z.location);
        ++count;
      }
    }
    o.detail << " max root error " << worst;
    o.require(worst <= 1e-10, "root error");
  });

  report(4, "Re(r1 + r2) = 1 - k on 10 random degenerate operators with vanishing b", [&](Outcome& o) {
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> loc(0.0, 1.0);
    std::uniform_int_distribution<int> kd(2, 4);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const double x0 = loc(rng);
      const int k = kd(rng);
      std::uniform_int_distribution<int> ld(k - 1, k + 1);
      const int l = ld(rng);
      const TrigPoly s = TrigPoly::sine(1).shifted(-x0);
      const TrigPoly a = s.pow(k) * random_trig(rng, 1.0, 0.2, 2);
      const TrigPoly b = s.pow(l) * random_trig(rng, 1.0, 0.3, 1);
      const SturmLiouvilleOperator op(a, b);
      double z0 = x0;
      for (const ZeroRecord& z : op.zeros())
        if (std::abs(circle_delta(z.location, x0)) < 1e-8) z0 = z.location;
      const LocalODE ode = expand_operator(op, z0, 0.0, kN + k + 12);
      o.require(is_regular_singular(ode), "regular singular");
      const IndicialEquation e = indicial_equation(ode);
      worst = std::max(worst, std::abs((e.r1 + e.r2).real() - (1.0 - k)));
      residual_pool.emplace_back(op, x0);
    }
    o.detail << " max deviation " << worst;
    o.require(worst <= 1e-9, "root sum");
  });

  report(5, "series residual slopes >= N - 1 - Re r - 0.5", [&](Outcome& o) {
    int checked = 0, failed = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    double max_failing_re = -std::numeric_limits<double>::infinity();
    double min_excess_over_plus = std::numeric_limits<double>::infinity();
    auto check_endpoint = [&](const SturmLiouvilleOperator& op, const ZeroRecord& z, const std::string& tag) {
      for (Side side : {Side::Right, Side::Left})
        for (cplx lam : {kI, -kI}) {
          for (const auto& [s, ode] : endpoint_series(op, z, side, lam, kN)) {
            const SeriesResidual r = series_residual(ode, s, kResidualH);
            const double need = kN - 1 - s.exponent.real() - 0.5;
            worst_margin = std::min(worst_margin, r.slope - need);
            if (r.slope < need) {
              ++failed;
              max_failing_re = std::max(max_failing_re, s.exponent.real());
              min_excess_over_plus = std::min(min_excess_over_plus, r.slope - (kN - 1 + s.exponent.real()));
            }
            ++checked;
          }
        }
    };
    for (const GalleryOp& g : gallery())
      for (const ZeroRecord& z : g.op.zeros()) check_endpoint(g.op, z, g.name);
    for (const auto& [op, x0] : residual_pool)
      for (const ZeroRecord& z : op.zeros())
        if (std::abs(circle_delta(z.location, x0)) < 1e-8) check_endpoint(op, z, "random");
    o.detail << ' ' << checked << " series, min margin " << worst_margin;
    if (failed > 0) {
      o.detail << "; " << failed << " below bound, all with Re r <= " << max_failing_re
               << ", their slope - (N - 1 + Re r) >= " << min_excess_over_plus;
      o.require(false, "slope bound");
    }
  });

  report(6, "deficiency estimates and 24 symbolic/numeric cells", [&](Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    int cells = 0, agree = 0;
    for (const GalleryOp& g : gallery()) {
      const DeficiencyEstimate d = deficiency_estimate(g.op);
      o.detail << ' ' << g.name << ":(" << d.n_plus << ',' << d.n_minus << ')';
      if (g.esa)
        o.require(d.n_plus == 0 && d.n_minus == 0, g.name + " expected (0,0)");
      else
        o.require(d.n_plus >= 1 && d.n_minus >= 1, g.name + " expected deficiency");
      for (const ZeroDeficiency& zd : d.per_zero)
        for (const EndpointClassification& c : zd.cells) {
          ++cells;
          if (c.agrees()) ++agree;
        }
    }
    o.detail << " cells " << agree << '/' << cells;
    o.require(cells == 24 && agree == 24, "cell agreement");
    const double dt = seconds_since(t0);
    o.require(dt < 120.0, "runtime " + std::to_string(dt) + " s");
  });

  report(7, "a''/4 term changes no verdict", [&](Outcome& o) {
    for (const GalleryOp& g : gallery()) {
      const SturmLiouvilleOperator on = g.op.with_a4(true);
      o.require(is_esa(on).esa == is_esa(g.op).esa, g.name + " classifier");
      const DeficiencyEstimate d0 = deficiency_estimate(g.op), d1 = deficiency_estimate(on);
      o.require(d0.n_plus == d1.n_plus && d0.n_minus == d1.n_minus, g.name + " deficiency");
      for (std::size_t i = 0; i < d0.per_zero.size(); ++i)
        for (std::size_t j = 0; j < d0.per_zero[i].cells.size(); ++j) {
          const auto& c0 = d0.per_zero[i].cells[j];
          const auto& c1 = d1.per_zero[i].cells[j];
          o.require(c0.verdict == c1.verdict && c0.numeric_verdict == c1.numeric_verdict, g.name + " cell");
        }
    }
  });

  report(8, "normal-form reduction and Laplacian mode identity", [&](Outcome& o) {
    const LorentzModel nf = LorentzModel::normal_form_power(2);
    const SturmLiouvilleOperator p1 = separation_reduce(nf, 1);
    o.require(p1.b() == TrigPoly::constant_fn(-2.0 * pi), "b = -2 pi");
    const LorentzVerdict v = lorentz_esa_verdict(nf);
    o.require(!v.esa, "mode 1 not ESA");
    o.require(is_esa(separation_reduce(nf, 0)).esa, "mode 0 ESA");
    o.require(deficiency_estimate(p1).n_plus >= 1, "mode 1 deficiency");
    for (int mode : {0, 1}) {
      const LaplacianCheck c = laplacian_mode_identity_check(nf, TestFunction::gaussian(0.0, 0.1), mode);
      o.detail << " mode " << mode << " order " << c.order;
      o.require(c.order >= 1.9, "FD order mode " + std::to_string(mode));
    }
  });

  report(9, "Clifton-Pohl axis geodesic escape time and drift", [&](Outcome& o) {
    const Trajectory4D tr = geodesic_integrate(LorentzModel::clifton_pohl(), {1.0, 0.0, 0.0, 1.0}, 10.0);
    o.require(tr.status == FlowStatus::Blowup, "blowup status");
    o.require(tr.escape.has_value(), "escape estimate");
    if (tr.escape) {
      o.detail << " escape " << tr.escape->estimate;
      o.require(std::abs(tr.escape->estimate - 1.0) <= 0.01, "escape time");
    }
    const double drift = tr.drift_until(0.99);
    o.detail << " drift " << drift;
    o.require(drift <= 1e-6, "drift");
  });

  report(10, "conformal invariance of null completeness", [&](Outcome& o) {
    const LorentzModel cp = LorentzModel::clifton_pohl();
    const LorentzModel nf = LorentzModel::normal_form_power(2);
    const double a01 = nf.a_profile(0.1);
    struct Run {
      const char* tag;
      LorentzModel base;
      CotangentState init;
      double t_max;
    };
    const Run runs[] = {
        {"CP axis", cp, {1.0, 0.0, 0.0, 1.0}, 5.0},
        {"CP diagonal", cp, {1.0, 1.0, 0.0, 1.0}, 5.0},
        {"CP horizontal", cp, {0.5, -0.3, 1.0, 0.0}, 5.0},
        {"NF graph", nf, {0.0, 0.1, -0.5, 0.5 / a01}, 5.0},
        {"NF line", nf, {0.2, 0.3, 1.0, 0.0}, 5.0},
    };
    double worst = 0.0;
    for (const Run& r : runs)
      for (ConformalFactor phi : {ConformalFactor{0.7, 0.0}, ConformalFactor{0.0, 0.3}}) {
        const ConformalCheck c = conformal_null_check(r.base, phi, r.init, r.t_max);
        o.require(c.same_verdict, std::string(r.tag) + " verdict");
        o.require(c.hausdorff <= 1e-4, std::string(r.tag) + " hausdorff " + std::to_string(c.hausdorff));
        worst = std::max(worst, c.hausdorff);
      }
    o.detail << " max Hausdorff " << worst;
  });

  report(11, "relative symbol drift <= 1e-6 per unit time on completed runs", [&](Outcome& o) {
    for (const GalleryOp& g : gallery())
      for (double x0 : {0.11, 0.37, 0.73})
        for (double xi0 : {-2.0, 0.5, 1.5}) {
          const Trajectory tr = integrate(g.op, {x0, xi0}, 100.0);
          if (tr.status == FlowStatus::CompletedHorizon) note_drift(tr.p_drift);
        }
    const LorentzModel models[] = {LorentzModel::clifton_pohl(), LorentzModel::normal_form_power(2),
                                   LorentzModel::simple_quotient(), LorentzModel::clifton_pohl().wrapped({0.0, 0.3}),
                                   LorentzModel::normal_form_power(2).wrapped({0.0, 0.3})};
    const CotangentState inits[] = {{1.0, 0.5, 0.3, -0.7}, {0.3, 0.4, 0.2, 0.1}, {1.5, -0.5, 1.0, 0.5},
                                    {0.2, 0.3, 1.0, 0.0}};
    for (const LorentzModel& m : models)
      for (const CotangentState& s : inits) {
        const Trajectory4D tr = geodesic_integrate(m, s, 20.0);
        if (tr.status == FlowStatus::CompletedHorizon) note_drift(tr.h_drift);
      }
    o.detail << ' ' << drift_runs << " runs, max drift " << max_drift_seen;
    o.require(drift_runs > 0, "no completed runs");
    o.require(max_drift_seen <= 1e-6, "drift");
  });

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
