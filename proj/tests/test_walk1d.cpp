#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "trapsim/errors.hpp"
#include "trapsim/walk1d.hpp"

using namespace trapsim;

namespace {

Walk1DConfig base_config(double x, long long max_steps) {
  Walk1DConfig c;
  c.family = make_binary_family(0.5);
  c.x = x;
  c.a_x = default_a_x(x, c.family.y_max);
  c.w0 = 0.5;
  c.max_steps = max_steps;
  c.validate();
  return c;
}

}  // namespace

TEST_CASE("defaults") {
  CHECK(default_a_x(0.25, 1.0) == 0.25);
  CHECK(default_a_x(0.001, 1.0) == 0.02);  // floor for tiny steps
  CHECK(default_max_steps(0.26, 0.25) > 0);
  CHECK(default_max_steps(0.26, 1e-6) == 100000000);  // clamp
}

TEST_CASE("config validation names the violated constraint") {
  Walk1DConfig c = base_config(0.25, 100);
  c.a_x = 0.2;  // below x*y_max = 0.25
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base_config(0.25, 100);
  c.w0 = 0.1;  // outside the window
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base_config(0.25, 100);
  c.x = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("one-step empirical mean matches the exact drift") {
  // repeated single steps from w = 1/4 with kappa = 1/2, x = 0.05:
  // exact mean increment is x*(2p-1) = 0.0125
  Walk1DConfig c;
  c.family = make_binary_family(0.5);
  c.x = 0.05;
  c.a_x = 0.05;
  c.w0 = 0.25;
  c.max_steps = 1;
  c.validate();
  Rng rng(99);
  const int n = 1000000;
  double sum = 0.0;
  const Walk1DState start{0.25, 0};
  for (int i = 0; i < n; ++i) {
    sum += step(start, c, rng).w - 0.25;
  }
  const double emp = sum / n;
  const double exact = 0.05 * 0.25;
  const double sigma = 0.05 * std::sqrt(1.0 - 0.25 * 0.25) / std::sqrt((double)n);
  CHECK(std::fabs(emp - exact) < 4.0 * sigma);
}

TEST_CASE("step refuses states outside the window") {
  const Walk1DConfig c = base_config(0.25, 10);
  Rng rng(1);
  CHECK_THROWS_AS((void)step(Walk1DState{0.1, 0}, c, rng), ContractViolation);
  CHECK_THROWS_AS((void)step(Walk1DState{0.9, 0}, c, rng), ContractViolation);
}

TEST_CASE("run_exit terminates on the correct side") {
  const Walk1DConfig c = base_config(0.25, 100000);
  int lows = 0, highs = 0;
  for (int i = 0; i < 200; ++i) {
    Rng rng(derive_seed(7, i));
    const ExitRecord r = run_exit(c, rng);
    REQUIRE(r.side != ExitSide::censored);
    CHECK(r.tau >= 1);
    if (r.side == ExitSide::low) {
      CHECK(r.w_final < c.a_x);
      ++lows;
    } else {
      CHECK(r.w_final > 1.0 - c.a_x);
      ++highs;
    }
  }
  CHECK(lows > 0);
  CHECK(highs > 0);  // symmetric start: both sides occur
}

TEST_CASE("censoring at the horizon") {
  // from 0.5 one quarter-step cannot leave [0.25, 0.75]
  const Walk1DConfig c = base_config(0.25, 1);
  const ExitTimeSummary s = mc_exit(c, 50, 11);
  CHECK(s.censored == 50);
  CHECK(s.all_censored_lower_bound);
  CHECK(s.mean_T == 1.0);
}

TEST_CASE("mc_exit is a pure function of config, n and seed") {
  const Walk1DConfig c = base_config(0.25, 100000);
  std::vector<ExitRecord> r1, r2;
  const ExitTimeSummary a = mc_exit(c, 500, 42, &r1);
  const ExitTimeSummary b = mc_exit(c, 500, 42, &r2);
  CHECK(a.mean_T == b.mean_T);
  CHECK(a.se_T == b.se_T);
  REQUIRE(r1.size() == r2.size());
  for (size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].tau == r2[i].tau);
    CHECK(r1[i].w_final == r2[i].w_final);
  }
  const ExitTimeSummary other = mc_exit(c, 500, 43);
  CHECK(a.mean_T != other.mean_T);
}

TEST_CASE("mc mean agrees with the exact oracle value 16/3") {
  const Walk1DConfig c = base_config(0.25, 100000);
  const ExitTimeSummary s = mc_exit(c, 2000, 12345);
  CHECK(std::fabs(s.mean_T - 16.0 / 3.0) <= 3.0 * s.se_T);
  CHECK(s.median_T >= s.min_T);
  CHECK(s.median_T <= s.max_T);
  CHECK(s.censored == 0);
}

TEST_CASE("runs_to_csv layout") {
  std::vector<ExitRecord> recs;
  recs.push_back({3, ExitSide::low, 0.2, 0.0});
  recs.push_back({5, ExitSide::censored, 0.5, -1.5});
  const std::string csv = runs_to_csv(recs);
  CHECK(csv.find("run_id,tau,side,log_weight\n") == 0);
  CHECK(csv.find("0,3,low,0") != std::string::npos);
  CHECK(csv.find("1,5,censored,-1.5") != std::string::npos);
}
