#pragma once

#include <string>
#include <vector>

#include "trapsim/rate.hpp"
#include "trapsim/walk1d.hpp"

namespace trapsim {

struct RateFitPoint {
  double x = 0.0;
  double mean_T = 0.0;
  double se_T = 0.0;
};

struct RateFitReport {
  std::vector<RateFitPoint> points;  // sorted by descending x
  double slope = 0.0;                // coefficient of 1/x in log(mean_T)
  double intercept = 0.0;
  double slope_se = 0.0;
  double reference_C = 0.0;
  long long excluded_censored = 0;   // fully censored summaries dropped
};

// Weighted least squares of log(mean_T) on 1/x, weights = inverse squared
// relative standard errors. Needs >= 3 distinct x values after dropping fully
// censored summaries. Reports the slope for comparison against reference_C;
// makes no pass/fail judgment itself.
RateFitReport fit_rate(const std::vector<ExitTimeSummary>& summaries,
                       const RateProfile& profile);

std::string fit_to_json(const RateFitReport& report);

}  // namespace trapsim
