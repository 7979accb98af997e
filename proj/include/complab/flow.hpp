#pragma once

// Hamiltonian dynamics of the symbol p = -a(x) xi^2 + b(x) xi on T*(R/Z):
//   dx/dt = -2 a xi + b,   dxi/dt = a' xi^2 - b' xi.

#include <optional>
#include <string>
#include <vector>

#include "complab/classifier.hpp"

namespace complab {

struct PhasePoint {
  double x = 0.0;
  double xi = 0.0;

  bool operator==(const PhasePoint&) const = default;
};

struct FieldValue {
  double dx_dt = 0.0;
  double dxi_dt = 0.0;
};

FieldValue vector_field(const SturmLiouvilleOperator& op, const PhasePoint& s);

double symbol_value(const SturmLiouvilleOperator& op, const PhasePoint& s);

enum class FlowStatus {
  CompletedHorizon,
  Blowup,         // |xi| crossed every cap with geometrically shrinking crossing gaps
  StepUnderflow,  // step size collapsed before the caps were reached
  GrowthCapped,   // |xi| crossed every cap, but at a non-contracting pace (growth in infinite time)
};

std::string to_string(FlowStatus s);
FlowStatus flow_status_from_string(const std::string& s);

struct FlowControls {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double xi_cap = 1e6;
  int direction = 1;  // +1 forward, -1 backward in time
};

struct EscapeEstimate {
  double estimate = 0.0;
  double uncertainty = 0.0;
  std::vector<double> caps;
  std::vector<double> crossing_times;
};

struct FlowSample {
  double t = 0.0;  // elapsed time in the integration direction
  PhasePoint s;    // x on the covering line (not reduced mod 1)
};

struct Trajectory {
  std::vector<FlowSample> samples;
  FlowStatus status = FlowStatus::CompletedHorizon;
  std::optional<EscapeEstimate> escape;
  std::vector<double> caps;            // caps crossed
  std::vector<double> crossing_times;  // matching crossing times
  double p_drift = 0.0;  // max |p - p0| / max(S(0), S(t)), S = |a| xi^2 + |b xi|, divided by max(1, T)
  double max_abs_xi = 0.0;

  bool incomplete() const { return status == FlowStatus::Blowup || status == FlowStatus::StepUnderflow; }
};

/// Default cap ladder {1e-3, 1e-2, 1e-1, 1} x xi_cap.
std::vector<double> default_caps(double xi_cap);

Trajectory integrate(const SturmLiouvilleOperator& op, const PhasePoint& init, double t_max,
                     const FlowControls& controls = {});

/// Blowup times at each cap and their extrapolated limit. Throws
/// NumericError(NoBlowupDetected) when the run does not escape in finite time.
EscapeEstimate escape_time(const SturmLiouvilleOperator& op, const PhasePoint& init, const std::vector<double>& caps,
                           double t_max = 1e3, const FlowControls& controls = {});

enum class NullBranch { Zero, Graph };

/// (x0, 0) or (x0, b(x0)/a(x0)). Throws NumericError(DivisionAtZero).
PhasePoint null_branch_init(const SturmLiouvilleOperator& op, double x0, NullBranch branch);

struct ProbeGrid {
  std::vector<double> offsets{0.01, 0.02, 0.05, 0.1};  // multiples of the minimal zero gap, both signs
  int random_seeds = 4;
  unsigned seed = 0;
};

struct ProbeRun {
  PhasePoint init;
  NullBranch branch = NullBranch::Zero;
  int direction = 1;
  FlowStatus status = FlowStatus::CompletedHorizon;
  double max_abs_xi = 0.0;
  double p_drift = 0.0;
  std::optional<EscapeEstimate> escape;
};

struct FlowVerdict {
  bool complete_evidence = true;
  std::optional<ProbeRun> witness;  // first blowup found
  double max_abs_xi = 0.0;          // over runs that stayed below the caps
  std::vector<ProbeRun> runs;
};

/// Seeds on both null branches near every zero of a, plus random null seeds,
/// integrated in both time directions.
FlowVerdict completeness_probe(const SturmLiouvilleOperator& op, const ProbeGrid& grid = {}, double t_max = 1e3,
                               const FlowControls& controls = {});

}  // namespace complab
