#pragma once

// Quantum-side evidence: limit point / limit circle classification at each
// side of each zero of a, L^2 tail tests, and deficiency index estimates.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "complab/classifier.hpp"
#include "complab/frobenius.hpp"

namespace complab {

enum class EndpointVerdict { LimitPoint, LimitCircle };

std::string to_string(EndpointVerdict v);
EndpointVerdict endpoint_verdict_from_string(const std::string& s);

struct TailTest {
  double c = 0.1;                  // outer end of the integration range
  std::vector<double> eps;         // 1e-2 ... 1e-6 in half decades
  std::vector<double> partial;     // I(eps) = int_eps^c |u|^2
  std::vector<double> increments;  // I(eps_{j+1}) - I(eps_j)
  double slope = 0.0;              // d log I / d log eps over the last two decades
  double decay_slope = 0.0;        // d log D / d log eps over the last two decades
  bool convergent = false;
  double extrapolated = 0.0;  // geometric-tail extrapolation of I(0+) when convergent
};

/// Tail test for a sampler u on (0, c]. The increments over half-decade
/// shells behave like eps^s for |u|^2 ~ t^{s-1}; the integral converges iff
/// they decay, i.e. s > 0.1.
TailTest tail_integral_slope(const std::function<cplx(double)>& u, double c, double eps_hi = 1e-2,
                             double eps_lo = 1e-6);

/// A local solution on (0, c]: truncated series for t <= match_point() and
/// its continuation by numerical integration of the full equation beyond.
class LocalSolution {
 public:
  /// `flipped` evaluates the equation with b replaced by -b.
  LocalSolution(FrobeniusSeries series, const SturmLiouvilleOperator& op, double x0, Side side, cplx lambda,
                bool flipped, double c);

  cplx operator()(double t) const;
  double match_point() const { return t_match_; }
  const FrobeniusSeries& series() const { return series_; }

 private:
  struct Node {
    double t;
    cplx w, dw, ddw;
  };
  FrobeniusSeries series_;
  double t_match_;
  double c_;
  std::vector<Node> nodes_;
};

enum class SolutionKind { Frobenius, FrobeniusLog, Irregular, Smooth, Oscillatory };

std::string to_string(SolutionKind k);

struct EndpointSolution {
  std::string label;
  SolutionKind kind = SolutionKind::Frobenius;
  cplx exponent{0.0, 0.0};
  bool log_flag = false;
  bool l2_symbolic = false;
  TailTest tail;
  bool l2_numeric() const { return tail.convergent; }
};

struct EndpointClassification {
  ZeroRecord zero;
  Side side = Side::Right;
  cplx lambda{0.0, 1.0};
  cplx lambda_used{0.0, 1.0};  // 0 when the point is irregular at lambda
  EndpointVerdict verdict = EndpointVerdict::LimitPoint;
  EndpointVerdict numeric_verdict = EndpointVerdict::LimitPoint;
  std::vector<EndpointSolution> basis;
  std::string rule;
  std::optional<IndicialEquation> indicial;

  bool agrees() const { return verdict == numeric_verdict; }
};

struct DeficiencyControls {
  int series_order = 20;
  double eps_hi = 1e-2;
  double eps_lo = 1e-6;
};

/// Outer radius c of the tail test at `zero`: half the localization radius,
/// clamped to [0.02, 0.1].
double tail_radius(const SturmLiouvilleOperator& op, const ZeroRecord& zero);

EndpointClassification endpoint_classify(const SturmLiouvilleOperator& op, const ZeroRecord& zero, Side side,
                                         cplx lambda, const DeficiencyControls& controls = {});

/// ESA on the interval iff both sides are limit point for lambda = +i and -i.
bool interval_esa(const SturmLiouvilleOperator& op, const Interval& interval, const DeficiencyControls& controls = {});

struct ZeroDeficiency {
  ZeroRecord zero;
  std::vector<EndpointClassification> cells;  // (side, lambda) in the order R+i, L+i, R-i, L-i
  int lc_sides_plus = 0;
  int lc_sides_minus = 0;
};

struct DeficiencyEstimate {
  int n_plus = 0;   // kernel of P' + i, i.e. lambda = -i
  int n_minus = 0;  // kernel of P' - i, i.e. lambda = +i
  std::vector<ZeroDeficiency> per_zero;

  bool esa() const { return n_plus == 0 && n_minus == 0; }
};

/// Each zero contributes (number of limit-circle sides - 1) when positive.
DeficiencyEstimate deficiency_estimate(const SturmLiouvilleOperator& op, const DeficiencyControls& controls = {});

struct CrossValidation {
  bool classifier_esa = true;
  bool deficiency_esa = true;
  bool agreement = true;
  bool symbolic_numeric_agreement = true;
  std::vector<std::string> differences;
  CompletenessReport report;
  DeficiencyEstimate deficiency;
};

CrossValidation cross_validate(const SturmLiouvilleOperator& op, const DeficiencyControls& controls = {});

}  // namespace complab
