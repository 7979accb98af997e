#include "complab/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "complab/errors.hpp"

namespace complab {

namespace {

std::string describe(const TrigPoly& f) {
  std::ostringstream os;
  os.precision(6);
  os << f.constant();
  for (int n = 1; n <= f.degree(); ++n) {
    if (const double c = f.cos_coeffs()[n - 1]; c != 0.0) os << (c < 0 ? " - " : " + ") << std::abs(c) << " cos(2pi*" << n << "x)";
    if (const double s = f.sin_coeffs()[n - 1]; s != 0.0) os << (s < 0 ? " - " : " + ") << std::abs(s) << " sin(2pi*" << n << "x)";
  }
  return os.str();
}

}  // namespace

SturmLiouvilleOperator::SturmLiouvilleOperator(TrigPoly a, TrigPoly b, bool include_a4, ZeroTolerances tol)
    : a_(std::move(a)), b_(std::move(b)), include_a4_(include_a4), tol_(tol) {
  for (double x0 : find_zeros(a_, tol_)) zeros_.push_back(zero_profile(a_, b_, x0, tol_));
}

std::string SturmLiouvilleOperator::summary() const {
  return "a(x) = " + describe(a_) + "; b(x) = " + describe(b_) + (include_a4_ ? "; with a''/4" : "");
}

std::string to_string(ZeroCase c) {
  switch (c) {
    case ZeroCase::SimpleZero: return "SimpleZero";
    case ZeroCase::DegenerateBVanishes: return "DegenerateBVanishes";
    case ZeroCase::DegenerateBNonzero: return "DegenerateBNonzero";
  }
  return "SimpleZero";
}

ZeroCase zero_case_from_string(const std::string& s) {
  if (s == "SimpleZero") return ZeroCase::SimpleZero;
  if (s == "DegenerateBVanishes") return ZeroCase::DegenerateBVanishes;
  if (s == "DegenerateBNonzero") return ZeroCase::DegenerateBNonzero;
  throw std::invalid_argument("unknown zero case: " + s);
}

ZeroVerdict classify_zero(const ZeroRecord& zr) {
  ZeroVerdict v;
  v.zero = zr;
  if (zr.order_a == 1) {
    v.case_tag = ZeroCase::SimpleZero;
    if (zr.b_vanishes()) {
      v.reason =
          "simple-zero/log-branch: indicial double root 0 gives solutions f + g log|x|, both square "
          "integrable (limit circle); the fiber ODE dxi/dt = a'(x0) xi^2 - b'(x0) xi escapes in finite time";
    } else {
      v.reason =
          "simple-zero: indicial roots {0, iB/A} give bounded solutions f + |x|^{iB/A} g (limit circle); "
          "the null branch xi = b/a reaches the zero in finite time with |xi| -> infinity";
    }
  } else if (zr.b_vanishes()) {
    v.case_tag = ZeroCase::DegenerateBVanishes;
    v.classically_complete_here = true;
    v.esa_here = true;
    v.reason =
        "degenerate-zero/b-vanishes: a local solution fails to be square integrable (limit point); "
        "|dx/dt| = O(|x|) so trajectories never reach the zero";
  } else {
    v.case_tag = ZeroCase::DegenerateBNonzero;
    v.reason =
        "degenerate-zero/b-nonzero: solutions u1 and u3 exp(iE), E' = b/a, are both bounded (limit circle); "
        "the null branch moves with dx/dt = -b and reaches the zero in finite time";
  }
  return v;
}

ClassicalResult classical_complete(const SturmLiouvilleOperator& op) {
  ClassicalResult r;
  for (const ZeroRecord& z : op.zeros()) {
    ZeroVerdict v = classify_zero(z);
    r.complete = r.complete && v.classically_complete_here;
    r.witnesses.push_back(std::move(v));
  }
  return r;
}

EsaResult is_esa(const SturmLiouvilleOperator& op) {
  const ClassicalResult classical = classical_complete(op);
  EsaResult out;
  out.report.summary = op.summary();
  out.report.verdicts = classical.witnesses;
  out.report.elliptic = op.elliptic();
  out.report.classical = classical.complete;
  bool quantum = true;
  for (const ZeroVerdict& v : classical.witnesses) quantum = quantum && v.esa_here;
  out.report.quantum = quantum;
  out.esa = quantum;
  return out;
}

Degree1Rule degree1_esa() {
  return {true,
          "degree-1: every formally self-adjoint first-order differential operator on a closed manifold, "
          "e.g. i(V + div(V)/2), is essentially self-adjoint"};
}

std::vector<Interval> localization_plan(const SturmLiouvilleOperator& op) {
  std::vector<double> zs;
  for (const ZeroRecord& z : op.zeros()) zs.push_back(z.location);
  if (zs.empty()) return {};
  std::sort(zs.begin(), zs.end());
  double gap = 1.0;
  for (std::size_t i = 0; i + 1 < zs.size(); ++i) gap = std::min(gap, zs[i + 1] - zs[i]);
  if (zs.size() > 1) gap = std::min(gap, zs.front() + 1.0 - zs.back());
  if (gap < 4.0 * op.tolerances().zero)
    throw NumericError(ErrorCode::ZerosTooClose, "zeros closer than the refinement tolerance");
  const double radius = std::min(0.4 * gap, 0.25);
  std::vector<Interval> plan;
  for (double z : zs) plan.push_back({z - radius, z + radius, z});
  return plan;
}

}  // namespace complab
