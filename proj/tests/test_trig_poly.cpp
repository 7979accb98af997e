#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "complab/errors.hpp"
#include "complab/trig_poly.hpp"

using namespace complab;
using std::numbers::pi;

namespace {

const TrigPoly kHalf(0.5, {-0.5}, {});  // sin^2(pi x)

TrigPoly random_poly(std::mt19937& rng, int degree) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> c(degree), s(degree);
  for (int i = 0; i < degree; ++i) {
    c[i] = u(rng);
    s[i] = u(rng);
  }
  return TrigPoly(u(rng), c, s);
}

}  // namespace

TEST_CASE("eval examples") {
  CHECK(eval(TrigPoly::sine(1), 0.25) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval(TrigPoly::constant_fn(1.0), 0.731) == 1.0);
  CHECK(eval(kHalf, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("derivative examples") {
  const TrigPoly d = derivative(TrigPoly::sine(1), 1);
  CHECK(d == TrigPoly::cosine(1, 2.0 * pi));
  CHECK(derivative(kHalf, 0) == kHalf);
  CHECK(eval(derivative(kHalf, 2), 0.0) == doctest::Approx(2.0 * pi * pi).epsilon(1e-14));
  CHECK(derivative(kHalf, 3).degree() == kHalf.degree());
}

TEST_CASE("find_zeros examples") {
  const auto z1 = find_zeros(TrigPoly::sine(1));
  REQUIRE(z1.size() == 2);
  CHECK(z1[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(z1[1] == doctest::Approx(0.5).epsilon(1e-12));
  const auto z2 = find_zeros(kHalf);
  REQUIRE(z2.size() == 1);
  CHECK(std::abs(z2[0]) < 1e-10);
  CHECK(find_zeros(TrigPoly::constant_fn(1.0)).empty());
  CHECK_THROWS_AS(find_zeros(TrigPoly()), NumericError);
}

TEST_CASE("zero_order examples") {
  ZeroOrder o = zero_order(TrigPoly::sine(1), 0.0);
  CHECK(o.k == 1);
  CHECK(o.lead == doctest::Approx(2.0 * pi));
  o = zero_order(kHalf, 0.0);
  CHECK(o.k == 2);
  CHECK(o.lead == doctest::Approx(2.0 * pi * pi));
  o = zero_order(kHalf * kHalf, 0.0);
  CHECK(o.k == 4);
  CHECK(o.lead == doctest::Approx(24.0 * std::pow(pi, 4)).epsilon(1e-10));
}

TEST_CASE("flat zero beyond max_order") {
  try {
    zero_order(kHalf.pow(7), 0.0, 12);
    FAIL("expected OrderTooHigh");
  } catch (const NumericError& e) {
    CHECK(e.code() == ErrorCode::OrderTooHigh);
  }
}

TEST_CASE("zero_profile examples") {
  ZeroRecord r = zero_profile(TrigPoly::sine(1), TrigPoly::constant_fn(1.0), 0.0);
  CHECK(r.order_a == 1);
  CHECK(r.b_value == doctest::Approx(1.0));
  CHECK_FALSE(r.b_vanishes());
  r = zero_profile(kHalf, TrigPoly(), 0.0);
  CHECK(r.order_a == 2);
  CHECK(r.order_b == kInfiniteOrder);
  r = zero_profile(kHalf, TrigPoly::sine(1), 0.0);
  CHECK(r.order_a == 2);
  CHECK(r.order_b == 1);
  CHECK(r.b_lead == doctest::Approx(2.0 * pi));
}

TEST_CASE("periodicity") {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const TrigPoly f = random_poly(rng, 8);
    for (double x : {-0.7, 0.0, 0.123, 0.5, 3.9}) CHECK(std::abs(f(x) - f(x + 1.0)) <= 1e-12);
  }
}

TEST_CASE("derivative matches centred differences at second order") {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const TrigPoly f = random_poly(rng, 8);
    const TrigPoly df = f.derivative();
    double err[2];
    const double hs[2] = {1e-3, 1e-4};
    for (int i = 0; i < 2; ++i) {
      err[i] = 0.0;
      for (double x = 0.0; x < 1.0; x += 0.0625) {
        const double fd = (f(x + hs[i]) - f(x - hs[i])) / (2.0 * hs[i]);
        err[i] = std::max(err[i], std::abs(fd - df(x)));
      }
    }
    CHECK(std::log10(err[0] / err[1]) >= 1.9);
  }
}

TEST_CASE("zeros invariant under positive scaling") {
  for (const TrigPoly& f : {TrigPoly::sine(1), kHalf, TrigPoly::sine(2) + TrigPoly::cosine(1, 0.3)}) {
    const auto z = find_zeros(f);
    const auto zs = find_zeros(f * 7.5);
    REQUIRE(z.size() == zs.size());
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::abs(z[i] - zs[i]) <= 1e-10);
  }
}

TEST_CASE("zero order is additive under products") {
  const TrigPoly gallery[] = {TrigPoly::sine(1), kHalf, kHalf * kHalf, TrigPoly::sine(2)};
  for (const TrigPoly& f : gallery)
    for (const TrigPoly& g : gallery)
      CHECK(zero_order(f * g, 0.0).k == zero_order(f, 0.0).k + zero_order(g, 0.0).k);
}

TEST_CASE("circle_delta") {
  CHECK(circle_delta(0.9, 0.1) == doctest::Approx(0.2));
  CHECK(circle_delta(0.1, 0.9) == doctest::Approx(-0.2));
}
