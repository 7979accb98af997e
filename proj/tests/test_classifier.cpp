#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "complab/classifier.hpp"
#include "complab/errors.hpp"

using namespace complab;
using std::numbers::pi;

namespace {

const TrigPoly kHalf(0.5, {-0.5}, {});
const TrigPoly kOne = TrigPoly::constant_fn(1.0);
const TrigPoly kSin = TrigPoly::sine(1);

struct Case {
  const char* name;
  TrigPoly a, b;
  bool complete;
};

std::vector<Case> gallery() {
  return {{"E1", kSin, kOne, false},        {"E2", kHalf, TrigPoly(), true}, {"E3", kHalf, kOne, false},
          {"E4", kHalf, kSin, true},        {"E5", kHalf * kHalf, kSin, true}, {"E6", kOne, kSin, true}};
}

}  // namespace

TEST_CASE("classify_zero examples") {
  ZeroRecord z;
  z.order_a = 1;
  z.b_value = 1.0;
  ZeroVerdict v = classify_zero(z);
  CHECK(v.case_tag == ZeroCase::SimpleZero);
  CHECK_FALSE(v.esa_here);
  CHECK_FALSE(v.classically_complete_here);

  z.order_a = 2;
  z.b_value = 0.0;
  z.order_b = 1;
  v = classify_zero(z);
  CHECK(v.case_tag == ZeroCase::DegenerateBVanishes);
  CHECK(v.esa_here);
  CHECK(v.classically_complete_here);

  z.b_value = -2.0 * pi;
  z.order_b = 0;
  v = classify_zero(z);
  CHECK(v.case_tag == ZeroCase::DegenerateBNonzero);
  CHECK_FALSE(v.esa_here);
  CHECK_FALSE(v.classically_complete_here);
  CHECK_FALSE(v.reason.empty());
}

TEST_CASE("simple zero with vanishing b is the log case") {
  ZeroRecord z;
  z.order_a = 1;
  z.order_b = 1;
  const ZeroVerdict v = classify_zero(z);
  CHECK_FALSE(v.esa_here);
  CHECK(v.reason.find("log") != std::string::npos);
}

TEST_CASE("classical_complete examples") {
  const ClassicalResult r1 = classical_complete({kSin, kOne});
  CHECK_FALSE(r1.complete);
  REQUIRE(r1.witnesses.size() == 2);
  CHECK(r1.witnesses[1].zero.location == doctest::Approx(0.5));
  CHECK(classical_complete({kHalf, TrigPoly()}).complete);
  CHECK(classical_complete({kOne, TrigPoly::cosine(3, 5.0)}).complete);
}

TEST_CASE("is_esa examples") {
  CHECK(is_esa({kHalf, kSin}).esa);
  CHECK(is_esa({kHalf * kHalf, kSin}).esa);
  CHECK_FALSE(is_esa({kHalf, kOne}).esa);
}

TEST_CASE("gallery verdicts and report invariants") {
  for (const Case& c : gallery()) {
    CAPTURE(c.name);
    const SturmLiouvilleOperator op(c.a, c.b);
    const EsaResult r = is_esa(op);
    CHECK(r.report.classical == c.complete);
    CHECK(r.report.quantum == c.complete);
    CHECK(r.report.classical == r.report.quantum);
    bool all = true;
    for (const ZeroVerdict& v : r.report.verdicts) all = all && v.classically_complete_here;
    CHECK(r.report.classical == (all || r.report.elliptic));
  }
}

TEST_CASE("scaling and reflection invariance") {
  for (const Case& c : gallery()) {
    CAPTURE(c.name);
    const SturmLiouvilleOperator op(c.a, c.b);
    for (double lam : {0.01, 3.0, 250.0}) {
      const EsaResult s = is_esa(op.scaled(lam));
      CHECK(s.esa == c.complete);
      REQUIRE(s.report.verdicts.size() == op.zeros().size());
      for (std::size_t i = 0; i < s.report.verdicts.size(); ++i)
        CHECK(s.report.verdicts[i].case_tag == is_esa(op).report.verdicts[i].case_tag);
    }
    const SturmLiouvilleOperator ref = op.reflected();
    CHECK(is_esa(ref).esa == c.complete);
    REQUIRE(ref.zeros().size() == op.zeros().size());
    for (const ZeroRecord& z : op.zeros()) {
      const double mirrored = std::fmod(1.0 - z.location, 1.0);
      bool found = false;
      for (const ZeroRecord& w : ref.zeros()) {
        if (std::abs(circle_delta(w.location, mirrored)) < 1e-9) {
          found = true;
          CHECK(classify_zero(w).case_tag == classify_zero(z).case_tag);
        }
      }
      CHECK(found);
    }
  }
}

TEST_CASE("verdicts ignore the elliptic region") {
  // Same zero data at x = 0, different coefficients away from it.
  const TrigPoly a2 = kHalf * (kOne + TrigPoly::cosine(1, 0.5) * kHalf);
  const TrigPoly b2 = kSin * (kOne + TrigPoly::sine(2, 0.3));
  const auto v1 = is_esa({kHalf, kSin}).report.verdicts;
  const auto v2 = is_esa({a2, b2}).report.verdicts;
  REQUIRE(v1.size() == 1);
  REQUIRE(v2.size() == 1);
  CHECK(v1[0].case_tag == v2[0].case_tag);
  CHECK(v1[0].esa_here == v2[0].esa_here);
}

TEST_CASE("random operators satisfy classical == quantum") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 30; ++i) {
    const TrigPoly a(u(rng), {u(rng), u(rng)}, {u(rng)});
    const TrigPoly b(u(rng), {u(rng)}, {u(rng)});
    const EsaResult r = is_esa({a, b});
    CHECK(r.report.classical == r.report.quantum);
  }
}

TEST_CASE("degree-1 rule") {
  const Degree1Rule r = degree1_esa();
  CHECK(r.esa);
  CHECK_FALSE(r.rule.empty());
}

TEST_CASE("localization plan") {
  const auto two = localization_plan({kSin, kOne});
  REQUIRE(two.size() == 2);
  CHECK(two[0].lo == doctest::Approx(-0.2));
  CHECK(two[0].hi == doctest::Approx(0.2));
  CHECK(two[1].lo == doctest::Approx(0.3));
  CHECK(two[1].hi == doctest::Approx(0.7));
  const auto one = localization_plan({kHalf, TrigPoly()});
  REQUIRE(one.size() == 1);
  CHECK(one[0].lo == doctest::Approx(-0.25));
  CHECK(one[0].hi == doctest::Approx(0.25));
  CHECK(localization_plan({kOne, kSin}).empty());
}

TEST_CASE("flat zeros are rejected") {
  CHECK_THROWS_AS(SturmLiouvilleOperator(kHalf.pow(7), kOne), NumericError);
}

TEST_CASE("a''/4 toggle keeps verdicts") {
  for (const Case& c : gallery()) {
    const SturmLiouvilleOperator op(c.a, c.b);
    CHECK(is_esa(op.with_a4(true)).report.quantum == is_esa(op).report.quantum);
  }
}
