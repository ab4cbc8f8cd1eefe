#pragma once

#include <map>
#include <string>
#include <vector>

#include "trapsim/increments.hpp"

namespace trapsim {

// Tabulated tilt roots lambda_w and their integral Lambda(w) over [w, 1/2]
// for one increment family; C = Lambda(0) is the exponential growth rate of
// the expected exit time as the step scale x shrinks.
struct RateProfile {
  std::string family_id;
  std::map<std::string, double> parameters;
  int grid_size = 0;   // number of panels; grid holds grid_size+1 nodes
  double tol = 0.0;    // root residual tolerance used at build time
  std::vector<double> grid;       // ascending w in [0, 1/2]
  std::vector<double> lambda;     // lambda_w at each node
  std::vector<double> biglambda;  // Lambda(w) at each node
  double C = 0.0;                 // Lambda(0)
  bool clipped_at_zero = false;   // first node solved at w_min instead of 0
};

// One-state exponentially reweighted step law used by the importance sampler.
struct TiltedKernel {
  std::string base_family;
  double delta = 0.0;
  double w = 0.0;
  double x = 0.0;
  AtomList atoms;
  double log_normalizer = 0.0;  // log sum of base p * exp(tilt exponent)
};

// Result of scanning the exponential one-step inequality
//   sum_atoms p * exp((1-delta) * x^-1 * (Lambda(w + x*y) - Lambda(w))) <= 1 + tolerance
// over an x-aligned w grid. The inequality provably fails close to 1/2 for
// fixed (delta, x) because the available slack shrinks like lambda_w^2 while
// the curvature correction stays of order x, so the certifiable region is a
// prefix window [a_x, window_end] rather than all of [a_x, 1/2]. The scan
// reports that maximal prefix and the first violation beyond it.
struct SupermartingaleWindow {
  double delta = 0.0;
  double x = 0.0;
  double a_x = 0.0;
  double tolerance = 0.0;
  std::vector<double> grid;    // scanned w nodes in [a_x, 1/2]
  std::vector<double> excess;  // (sum - 1) at each scanned node
  double window_start = 0.0;   // == a_x when the first node holds
  double window_end = 0.0;     // last node of the maximal holding prefix
  bool holds_on_full_grid = false;
  double first_violation_w = 0.0;       // meaningful iff !holds_on_full_grid
  double first_violation_excess = 0.0;  // sum - 1 there
};

// E[exp(-lambda * Y)] under atoms(family, w). Throws NumericError when
// |lambda| * y_max > 700 (exp would overflow double range).
double z_value(const IncrementFamily& family, double w, double lambda);

// The unique positive root of z_value(family, w, .) = 1, for 0 <= w < 1/2.
// Geometric bracket growth, bisection, one secant polish; residual <= tol.
double lambda_root(const IncrementFamily& family, double w, double tol);

// Tabulate lambda on a uniform grid of `grid_size` panels over [0, 1/2] and
// integrate it right-to-left with per-panel Simpson rules (midpoint roots are
// solved too), so every node's Lambda value has fourth-order accuracy.
RateProfile build_profile(const IncrementFamily& family, int grid_size, double tol);

// Piecewise-linear interpolation of the tabulated Lambda; exact at nodes;
// domain [0, 1/2] (DomainError outside).
double biglambda_at(const RateProfile& profile, double w);

// Lambda extended to [0, 1] by the mirror rule Lambda(w) = Lambda(1 - w).
double biglambda_reflected(const RateProfile& profile, double w);

// Tilted law at state w: atom probability proportional to
//   p * exp((1 + delta) * x^-1 * (Lambda_reflected(w + x*y) - Lambda_reflected(w))).
// The exponent grows the potential Lambda_reflected, i.e. pushes |w - 1/2|
// upward; delta = -1 yields the identity tilt. Requires w and w +- x*y_max
// inside [0, 1].
TiltedKernel tilt_kernel(const IncrementFamily& family, const RateProfile& profile,
                         double w, double x, double delta);

// Scan the one-step exponential inequality above on an internal grid aligned
// with the step scale x (node lookups, no interpolation inside the exponent,
// provided x*y is a whole number of grid steps for every atom offset y).
SupermartingaleWindow certify_supermartingale(const IncrementFamily& family,
                                              double delta, double x,
                                              double tolerance = 1e-9);

// Serialization: CSV with header (w, lambda, biglambda) and a JSON header
// object carrying family_id, parameters, grid_size, tol, C.
std::string profile_to_csv(const RateProfile& profile);
std::string profile_to_json(const RateProfile& profile);
RateProfile profile_from_csv_json(const std::string& csv, const std::string& json);

}  // namespace trapsim
