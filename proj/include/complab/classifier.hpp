#pragma once

// Decision procedure for completeness of degenerate Sturm-Liouville operators
//   P = d_x a d_x - i b d_x - (i/2) b' (+ a''/4)
// on R/Z with symbol p = -a xi^2 + b xi.

#include <string>
#include <vector>

#include "complab/trig_poly.hpp"

namespace complab {

class SturmLiouvilleOperator {
 public:
  /// Locates the zeros of `a` and records their profiles. Throws
  /// NumericError(OrderTooHigh) when a zero of `a` has no finite order.
  SturmLiouvilleOperator(TrigPoly a, TrigPoly b, bool include_a4 = false, ZeroTolerances tol = {});

  const TrigPoly& a() const { return a_; }
  const TrigPoly& b() const { return b_; }
  bool include_a4() const { return include_a4_; }
  const ZeroTolerances& tolerances() const { return tol_; }
  const std::vector<ZeroRecord>& zeros() const { return zeros_; }
  bool elliptic() const { return zeros_.empty(); }

  double symbol(double x, double xi) const { return -a_(x) * xi * xi + b_(x) * xi; }

  SturmLiouvilleOperator with_a4(bool on) const { return {a_, b_, on, tol_}; }
  /// (lambda a, lambda b).
  SturmLiouvilleOperator scaled(double lambda) const { return {a_ * lambda, b_ * lambda, include_a4_, tol_}; }
  /// Pullback by x -> -x: a(-x), and b(-x) with the sign flip that d_x picks up.
  SturmLiouvilleOperator reflected() const { return {a_.reflected(), -b_.reflected(), include_a4_, tol_}; }

  std::string summary() const;

 private:
  TrigPoly a_;
  TrigPoly b_;
  bool include_a4_;
  ZeroTolerances tol_;
  std::vector<ZeroRecord> zeros_;
};

enum class ZeroCase { SimpleZero, DegenerateBVanishes, DegenerateBNonzero };

std::string to_string(ZeroCase c);
ZeroCase zero_case_from_string(const std::string& s);

struct ZeroVerdict {
  ZeroRecord zero;
  ZeroCase case_tag = ZeroCase::SimpleZero;
  bool classically_complete_here = false;
  bool esa_here = false;
  std::string reason;

  bool operator==(const ZeroVerdict&) const = default;
};

struct CompletenessReport {
  std::string summary;
  std::vector<ZeroVerdict> verdicts;
  bool classical = true;
  bool quantum = true;
  bool elliptic = true;

  bool operator==(const CompletenessReport&) const = default;
};

ZeroVerdict classify_zero(const ZeroRecord& zr);

struct ClassicalResult {
  bool complete = true;
  std::vector<ZeroVerdict> witnesses;
};

ClassicalResult classical_complete(const SturmLiouvilleOperator& op);

struct EsaResult {
  bool esa = true;
  CompletenessReport report;
};

EsaResult is_esa(const SturmLiouvilleOperator& op);

struct Degree1Rule {
  bool esa = true;
  std::string rule;

  bool operator==(const Degree1Rule&) const = default;
};

/// Formally self-adjoint first-order operators on closed manifolds are
/// essentially self-adjoint; exposed so degree-1 queries have a uniform answer.
Degree1Rule degree1_esa();

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double center = 0.0;
  double radius() const { return 0.5 * (hi - lo); }
};

/// Disjoint intervals centred at the zeros of `a` (radius 0.4 x minimal
/// circular gap, capped at 1/4). Throws NumericError(ZerosTooClose).
std::vector<Interval> localization_plan(const SturmLiouvilleOperator& op);

}  // namespace complab
