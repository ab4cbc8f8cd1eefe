#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "trapsim/rng.hpp"
#include "trapsim/urn.hpp"

using namespace trapsim;

TEST_CASE("two-draw outcome probabilities at w = 1/4") {
  const UrnOutcomeProbs p = urn_outcome_probs(0.25);
  CHECK(p.both_red == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
  CHECK(p.both_black == doctest::Approx(9.0 / 16.0).epsilon(1e-15));
  CHECK(p.mixed == doctest::Approx(6.0 / 16.0).epsilon(1e-15));
  CHECK(p.both_red + p.both_black + p.mixed == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("a step reinforces then decays") {
  UrnState s;
  s.red = 3.0;
  s.black = 1.0;
  Rng rng(5);
  const double x = 0.25;
  for (int i = 0; i < 100; ++i) {
    const UrnState next = urn_step(s, x, rng);
    CHECK(next.t == s.t + 1);
    const double grew = next.total() / (1.0 - x) - s.total();
    // total reinforcement is 1 (same-color draw) or 2 (mixed draw)
    const bool one = std::fabs(grew - 1.0) < 1e-9;
    const bool two = std::fabs(grew - 2.0) < 1e-9;
    CHECK((one || two));
    CHECK(next.red >= 0.0);
    CHECK(next.black > 0.0);
    s = next;
  }
}

TEST_CASE("empirical one-step fraction drift matches the closed form") {
  UrnState s;
  s.red = 4.0;
  s.black = 9.0;  // w = 4/13, total 13
  const double w = s.fraction();
  const double drift = urn_drift(w, s.total());
  CHECK(drift > 0.0);  // below 1/2, mixed draws push the fraction inward
  Rng rng(31337);
  const int n = 400000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = urn_step(s, 0.1, rng).fraction() - w;
    sum += d;
    sumsq += d * d;
  }
  const double emp = sum / n;
  const double sd = std::sqrt(sumsq / n - emp * emp);
  CHECK(std::fabs(emp - drift) < 4.0 * sd / std::sqrt((double)n));
}

TEST_CASE("drift vanishes at the balanced fraction and at the corners") {
  CHECK(urn_drift(0.5, 20.0) == 0.0);
  CHECK(urn_drift(0.0, 20.0) == 0.0);
  CHECK(urn_drift(1.0, 20.0) == 0.0);
  CHECK(urn_drift(0.75, 20.0) < 0.0);
}

TEST_CASE("stationary total fixed point") {
  // S* = (1-x)(1 + 2w(1-w))/x solves S = (1-x)(S + E[reinforcement])
  const double s = urn_stationary_total(0.5, 0.1);
  CHECK(s == doctest::Approx(0.9 * 1.5 / 0.1).epsilon(1e-12));
  const double w = 0.3, x = 0.2;
  const double fix = urn_stationary_total(w, x);
  CHECK(fix == doctest::Approx((1 - x) * (fix + 1 + 2 * w * (1 - w))).epsilon(1e-12));
}

TEST_CASE("steps are reproducible by seed") {
  UrnState s;
  s.red = 2.0;
  s.black = 2.0;
  Rng r1(77), r2(77), r3(78);
  UrnState a = s, b = s, c = s;
  for (int i = 0; i < 50; ++i) {
    a = urn_step(a, 0.1, r1);
    b = urn_step(b, 0.1, r2);
    c = urn_step(c, 0.1, r3);
  }
  CHECK(a.red == b.red);
  CHECK(a.black == b.black);
  CHECK(a.red != c.red);
}
