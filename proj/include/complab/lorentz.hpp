#pragma once

// Lorentzian model surfaces in a covering chart: null geodesics as the
// Hamiltonian flow of the dual metric, conformal wraps, and the reduction of
// the normal-form Laplacian to a Sturm-Liouville operator by Fourier modes in x.
//
// Dual metric conventions (constant factors only rescale time):
//   CliftonPohl     g = dx dy / (x^2 + y^2)   h = (x^2 + y^2) xi eta
//   NormalForm      g = dx (dy - a(y) dx)     h = -eta (a(y) eta + xi)
//   SimpleQuotient  g = dx dy on x > 0        h = xi eta
//   conformal wrap  g -> e^{phi} g            h -> e^{-phi} h

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "complab/classifier.hpp"
#include "complab/flow.hpp"

namespace complab {

enum class LorentzKind { CliftonPohl, NormalForm, SimpleQuotient };

std::string to_string(LorentzKind k);
LorentzKind lorentz_kind_from_string(const std::string& s);

/// phi = constant + amplitude * sin(theta), where theta is the polar angle
/// atan2(y, x) on the punctured-plane models and 2 pi x on the normal form.
struct ConformalFactor {
  double constant = 0.0;
  double amplitude = 0.0;

  bool operator==(const ConformalFactor&) const = default;
};

struct LorentzModel {
  LorentzKind kind = LorentzKind::CliftonPohl;
  TrigPoly a_profile;     // NormalForm only, a function of y on R/Z
  int profile_order = 0;  // order of the zero of a_profile at y = 0 (0 if a(0) != 0)
  std::optional<ConformalFactor> phi;

  static LorentzModel clifton_pohl();
  static LorentzModel simple_quotient();
  /// Throws NumericError(OrderTooHigh) if the zero at y = 0 is flat.
  static LorentzModel normal_form(TrigPoly a_profile);
  /// Profile (sin(2 pi y) / (2 pi))^k, which behaves like y^k at y = 0.
  static LorentzModel normal_form_power(int k);

  LorentzModel wrapped(ConformalFactor phi) const;
  bool is_wrap() const { return phi.has_value(); }
  std::string variant_name() const;

  bool operator==(const LorentzModel&) const = default;
};

struct CotangentState {
  double x = 0.0, y = 0.0, xi = 0.0, eta = 0.0;

  bool operator==(const CotangentState&) const = default;
};

double dual_hamiltonian(const LorentzModel& m, const CotangentState& s);

/// (dx/dt, dy/dt, dxi/dt, deta/dt) = (h_xi, h_eta, -h_x, -h_y).
std::array<double, 4> hamiltonian_field(const LorentzModel& m, const CotangentState& s);

struct LorentzSample {
  double t = 0.0;
  CotangentState s;
  double h = 0.0;
  double scale = 0.0;  // sum of |monomials| of h, the reference for relative drift
};

struct Trajectory4D {
  std::vector<LorentzSample> samples;
  FlowStatus status = FlowStatus::CompletedHorizon;
  std::optional<EscapeEstimate> escape;
  double h_drift = 0.0;  // max |h - h0| / max(S(0), S(t)) over samples, divided by max(1, T)
  double h_initial = 0.0;

  bool incomplete() const { return status == FlowStatus::Blowup || status == FlowStatus::StepUnderflow; }
  /// Largest relative drift among samples with t <= t_end (not divided by time).
  double drift_until(double t_end) const;
};

/// Escape is detected on max(|x|, |y|, |xi|, |eta|), and additionally on
/// 1/r (punctured plane) or 1/x (half plane) for approach to the chart boundary.
Trajectory4D geodesic_integrate(const LorentzModel& m, const CotangentState& init, double t_max,
                                const FlowControls& controls = {});

/// Normal-form Laplacian on the Fourier mode e^{2 pi i m x}: a = a_profile, b = -2 pi m.
SturmLiouvilleOperator separation_reduce(const LorentzModel& m, int mode);

struct LorentzVerdict {
  bool esa = true;
  int mode = 1;
  std::string reduction;  // summary of the reduced operator
  CompletenessReport report;
};

/// Reduces at mode 1 and classifies.
LorentzVerdict lorentz_esa_verdict(const LorentzModel& m);

struct ConformalCheck {
  FlowStatus base_status = FlowStatus::CompletedHorizon;
  FlowStatus wrap_status = FlowStatus::CompletedHorizon;
  bool same_verdict = true;
  double hausdorff = 0.0;  // symmetric, on position-space paths inside the window
  std::size_t compared_points = 0;
  std::optional<double> escape_ratio;  // wrap / base escape time when both escape
};

/// Integrates the null geodesic from `init` for `base` and for `base` wrapped
/// by `phi`, and compares the position-space paths inside the box
/// max(|x|, |y|) <= window. The wrapped run gets horizon t_max * e^{max phi};
/// if only it escapes, the base run is extended to t_max * e^{max phi - min phi}.
ConformalCheck conformal_null_check(const LorentzModel& base, const ConformalFactor& phi, const CotangentState& init,
                                    double t_max, double window = 2.0, const FlowControls& controls = {});

struct TestFunction {
  std::function<double(double)> v, dv, d2v;

  static TestFunction gaussian(double center, double width);
  static TestFunction zero();
};

struct LaplacianCheck {
  double h = 0.0;
  double residual_h = 0.0;
  double residual_h2 = 0.0;  // at h / 2
  double order = 0.0;        // log2(residual_h / residual_h2)
};

/// Compares the finite-difference box operator d_y a d_y + d_x d_y on
/// e^{2 pi i m x} v(y) with e^{2 pi i m x} (P v)(y) for the reduced operator P.
LaplacianCheck laplacian_mode_identity_check(const LorentzModel& m, const TestFunction& v, int mode, double h = 1e-3);

}  // namespace complab
