#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "trapsim/rng.hpp"
#include "trapsim/triad.hpp"

namespace trapsim {

// Expected one-step displacement of the normalized state (edge weights scaled
// to total C(N,2), so the symmetric point is the all-ones vector).
struct DriftField {
  int n = 0;                  // N - 1
  std::vector<double> at;     // evaluation point, normalized coordinates
  std::vector<double> value;  // expected displacement; components sum to 0
};

struct MeanFieldLinearization {
  int n = 0;
  double B0 = 0.0, B1 = 0.0, B2 = 0.0;
  std::array<std::array<double, 3>, 3> reduced{};  // acts on (a2, a1, a0)
  std::array<double, 3> eigenvalues{};             // {0, e1, e2}, e1 >= e2
  // Closed-form left eigenvectors, row k paired with eigenvalues[k]:
  // (1,1,1), ((n-1)/2, (n-3)/4, -1), (C(n-1,2), -(n-2)/2, 1).
  std::array<std::array<double, 3>, 3> left_eigenvectors{};
  bool attracting = false;
};

struct LyapunovCertificate {
  int n = 0;                    // N - 1
  double x = 0.0;
  double radius = 0.0;
  int grid_checked = 0;         // shell points where inequalities were evaluated
  std::vector<double> center;   // the symmetric point in normalized coordinates
  double V0 = 0.0;              // V = V0 - q_scale * |h - center|^2 on the zero-sum subspace
  double q_scale = 0.0;         // spectral gap 1 - e1
  std::string q_structure;      // human-readable description of the quadratic form
  double lambda = 0.0;          // found tilt, 0 when none
  double gamma = 0.0;           // lambda * V0 / 4, 0 when not verified
  bool mean_condition_ok = false;
  bool verified = false;
  double worst_mean_margin = 0.0;       // min over shell of E[V(next)] - V(point)
  std::vector<double> worst_point;      // displacement h attaining the minimum
  double center_mean_change = 0.0;      // E[V(next)] - V0 at the center (noise floor)
  int outside_probes_negative = 0;      // probes at 2*radius with V < 0
  int outside_probes_total = 0;
  std::string failure_reason;           // empty when verified
};

// Exact expected raw reinforcement per edge in one step (sum over agents of
// the probability the edge lies in that agent's sampled trio). N <= 10.
std::vector<double> expected_reinforcement(const NetworkState& state);

// Exact drift by full trio enumeration; N <= 10 (DomainError directs larger
// populations to mc_drift).
DriftField drift(const NetworkState& state);

// Monte Carlo drift estimate (any N); per-edge standard errors optional.
DriftField mc_drift(const NetworkState& state, long long replicates, Rng& rng,
                    std::vector<double>* se_out = nullptr);

// Closed forms: B0 = 2(n-2)/(3n), B1 = 0, B2 = -4/(3n(n-1)); n >= 3.
std::array<double, 3> bj_coefficients(int n);

// The reduced response matrix with prefactor 4/(3n(n-1)); n >= 4.
std::array<std::array<double, 3>, 3> reduced_matrix(int n);

// Closed-form eigenvalues {0, (2/3)(n+1)(n-2)/(n(n-1)), (2/3)(n-3)/(n-1)},
// cross-validated against a numeric eigendecomposition of reduced_matrix(n)
// to 1e-9 (NumericError on mismatch); attracting iff both nonzero ones < 1.
MeanFieldLinearization spectrum(int n);

// Quadratic certificate on a shell of `grid_resolution` random zero-sum
// directions at `radius` about the symmetric point (plus the three
// edge-distance pattern directions): first the exact mean condition
// E[V(next)] > V(point) everywhere, then a search over lambda in {2^-k},
// k = 0..20, for E[exp(-lambda V(next))] <= exp(-lambda V(point)) everywhere,
// all expectations computed by exact enumeration of the N simultaneous
// trio choices. n + 1 <= 8.
LyapunovCertificate lyapunov_certificate(int n, double x, double radius,
                                         int grid_resolution,
                                         std::uint64_t seed,
                                         TrioRule rule = TrioRule::product_all_pairs);

std::string linearization_to_json(const MeanFieldLinearization& lin);
std::string spectrum_scan_to_csv(int n_min, int n_max);
std::string certificate_to_json(const LyapunovCertificate& cert);

}  // namespace trapsim
