#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "trapsim/errors.hpp"
#include "trapsim/meanfield.hpp"
#include "trapsim/rng.hpp"
#include "trapsim/triad.hpp"

using namespace trapsim;

namespace {

// Mean excess reinforcement over the symmetric level 6/n, grouped by the
// number of endpoints an edge shares with the perturbed edge (0,1).
std::array<double, 3> excess_by_distance(TrioRule rule, double eps) {
  NetworkState s = init_state(6, 0.4, InitMode::unit);
  s.rule = rule;
  s.pair(0, 1) *= 1.0 + eps;
  const std::vector<double> r = expected_reinforcement(s);
  const double base = 6.0 / (s.N - 1.0);
  std::array<double, 3> sum{0.0, 0.0, 0.0};
  std::array<int, 3> count{0, 0, 0};
  for (int i = 0; i < s.N; ++i) {
    for (int j = i + 1; j < s.N; ++j) {
      const int shared = (i < 2 ? 1 : 0) + (j < 2 ? 1 : 0);
      const int dist = 2 - shared;
      sum[dist] += r[s.edge_index(i, j)] - base;
      count[dist] += 1;
    }
  }
  CHECK(count == std::array<int, 3>{1, 8, 6});
  return {sum[0] / count[0], sum[1] / count[1], sum[2] / count[2]};
}

}  // namespace

TEST_CASE("closed-form response coefficients at n = 5") {
  const auto bj = bj_coefficients(5);
  CHECK(bj[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(bj[1] == 0.0);
  CHECK(bj[2] == doctest::Approx(-1.0 / 15.0).epsilon(1e-15));
}

TEST_CASE("reduced response matrix at n = 5") {
  const auto m = reduced_matrix(5);
  const double want[3][3] = {{0.4, 0.0, -1.0 / 15.0},
                             {0.0, 0.2, -4.0 / 15.0},
                             {-0.4, -0.2, 1.0 / 3.0}};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      CHECK(m[r][c] == doctest::Approx(want[r][c]).epsilon(1e-14));
    }
  }
}

TEST_CASE("spectrum at n = 5 and the interlacing order") {
  const MeanFieldLinearization lin = spectrum(5);
  CHECK(lin.eigenvalues[0] == 0.0);
  CHECK(lin.eigenvalues[1] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(lin.eigenvalues[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(lin.attracting);
}

TEST_CASE("left eigenvector identities hold across the whole scan range") {
  for (int n = 4; n <= 40; ++n) {
    const MeanFieldLinearization lin = spectrum(n);
    CHECK(lin.attracting);
    for (int k = 0; k < 3; ++k) {
      const auto& v = lin.left_eigenvectors[k];
      for (int c = 0; c < 3; ++c) {
        double dot = 0.0;
        for (int r = 0; r < 3; ++r) {
          dot += v[r] * lin.reduced[r][c];
        }
        CHECK(std::fabs(dot - lin.eigenvalues[k] * v[c]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("the symmetric point is a drift zero under both rules") {
  for (int N = 4; N <= 8; ++N) {
    for (TrioRule rule : {TrioRule::product_all_pairs, TrioRule::chooser_pairs_only}) {
      NetworkState s = init_state(N, 0.3, InitMode::stationary);
      s.rule = rule;
      const DriftField field = drift(s);
      CHECK(field.n == N - 1);
      double worst = 0.0;
      for (double v : field.value) {
        worst = std::max(worst, std::fabs(v));
      }
      CHECK(worst <= 1e-12);

      const std::vector<double> r = expected_reinforcement(s);
      for (double re : r) {
        CHECK(std::fabs(re - 6.0 / (N - 1.0)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("drift components always sum to zero") {
  NetworkState s = init_state(6, 0.4, InitMode::stationary);
  s.pair(0, 1) *= 1.5;
  s.pair(2, 3) *= 0.7;
  const DriftField field = drift(s);
  double sum = 0.0;
  for (double v : field.value) sum += v;
  CHECK(std::fabs(sum) <= 1e-12);
}

TEST_CASE("single-edge response matches the predicted distance pattern") {
  const double base = 6.0 / 5.0;
  const auto bj = bj_coefficients(5);
  for (double eps : {0.01, 0.005}) {
    const auto ex = excess_by_distance(TrioRule::chooser_pairs_only, eps);
    CHECK(std::fabs(ex[1]) <= 1e-15);  // B1 = 0 is exact for this rule
    for (int j : {0, 2}) {
      CHECK(std::fabs(ex[j] - base * bj[j] * eps) <= 10.0 * eps * eps);
    }
  }
  // quadratic convergence: halving eps cuts the residual at least threefold
  const auto coarse = excess_by_distance(TrioRule::chooser_pairs_only, 0.01);
  const auto fine = excess_by_distance(TrioRule::chooser_pairs_only, 0.005);
  for (int j : {0, 2}) {
    const double err_c = std::fabs(coarse[j] - base * bj[j] * 0.01);
    const double err_f = std::fabs(fine[j] - base * bj[j] * 0.005);
    CHECK(err_f <= err_c / 3.0);
  }
}

TEST_CASE("frozen response excesses for the chooser-pairs rule") {
  const auto ex = excess_by_distance(TrioRule::chooser_pairs_only, 0.01);
  CHECK(ex[0] == doctest::Approx(0.00478087649402426).epsilon(1e-10));
  CHECK(ex[2] == doctest::Approx(-0.000796812749003895).epsilon(1e-10));
}

TEST_CASE("the all-pairs rule couples nearest neighbours at first order") {
  const auto ex = excess_by_distance(TrioRule::product_all_pairs, 0.01);
  CHECK(std::fabs(ex[1]) >= 1e-4);
}

TEST_CASE("Monte Carlo drift agrees with exact enumeration") {
  NetworkState s = init_state(6, 0.4, InitMode::stationary);
  s.pair(0, 1) *= 1.3;
  const DriftField exact = drift(s);
  Rng rng(5);
  std::vector<double> se;
  const DriftField mc = mc_drift(s, 20000, rng, &se);
  REQUIRE(mc.value.size() == exact.value.size());
  REQUIRE(se.size() == exact.value.size());
  for (size_t e = 0; e < se.size(); ++e) {
    CHECK(std::fabs(mc.value[e] - exact.value[e]) <= 5.0 * se[e] + 1e-12);
  }
}

TEST_CASE("exact enumeration refuses oversized populations") {
  NetworkState s = init_state(11, 0.1, InitMode::unit);
  CHECK_THROWS_AS((void)drift(s), DomainError);
  CHECK_THROWS_AS((void)expected_reinforcement(s), DomainError);
}

TEST_CASE("spectrum scan serializes one row per population size") {
  const std::string csv = spectrum_scan_to_csv(4, 8);
  CHECK(csv.rfind("n,lambda2,lambda3,attracting\n", 0) == 0);
  int rows = 0;
  size_t pos = csv.find('\n');
  while (pos != std::string::npos) {
    const size_t next = csv.find('\n', pos + 1);
    if (next == std::string::npos) break;
    const std::string line = csv.substr(pos + 1, next - pos - 1);
    int n = 0, attracting = -1;
    double l2 = -1.0, l3 = -1.0;
    REQUIRE(std::sscanf(line.c_str(), "%d,%lf,%lf,%d", &n, &l2, &l3, &attracting) == 4);
    CHECK(n == 4 + rows);
    const MeanFieldLinearization lin = spectrum(n);
    CHECK(l2 == doctest::Approx(lin.eigenvalues[1]).epsilon(1e-15));
    CHECK(l3 == doctest::Approx(lin.eigenvalues[2]).epsilon(1e-15));
    CHECK(attracting == 1);
    rows += 1;
    pos = next;
  }
  CHECK(rows == 5);
  CHECK(linearization_to_json(spectrum(5)).find("left_eigenvectors") != std::string::npos);
}
