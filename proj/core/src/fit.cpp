#include "trapsim/fit.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "trapsim/errors.hpp"
#include "trapsim/io.hpp"

namespace trapsim {

RateFitReport fit_rate(const std::vector<ExitTimeSummary>& summaries,
                       const RateProfile& profile) {
  RateFitReport report;
  report.reference_C = profile.C;
  for (const ExitTimeSummary& s : summaries) {
    if (s.all_censored_lower_bound) {
      ++report.excluded_censored;
      continue;
    }
    if (!(s.mean_T > 0.0)) {
      throw DomainError("fit_rate: nonpositive mean exit time at x = " + fmt17(s.x));
    }
    report.points.push_back({s.x, s.mean_T, s.se_T});
  }
  std::sort(report.points.begin(), report.points.end(),
            [](const RateFitPoint& a, const RateFitPoint& b) { return a.x > b.x; });
  std::set<double> distinct;
  for (const RateFitPoint& p : report.points) {
    distinct.insert(p.x);
  }
  if (distinct.size() < 3) {
    throw DomainError("fit_rate: need at least 3 distinct x values, got " +
                      std::to_string(distinct.size()));
  }

  // y = log mean_T against u = 1/x; var(y) ~ (se/mean)^2, so weight by its
  // inverse. Zero-se synthetic inputs get unit weight (exact-fit tests).
  double sw = 0.0, su = 0.0, sy = 0.0, suu = 0.0, suy = 0.0;
  for (const RateFitPoint& p : report.points) {
    const double u = 1.0 / p.x;
    const double y = std::log(p.mean_T);
    const double rel = p.se_T / p.mean_T;
    const double w = rel > 0.0 ? 1.0 / (rel * rel) : 1.0;
    sw += w;
    su += w * u;
    sy += w * y;
    suu += w * u * u;
    suy += w * u * y;
  }
  const double det = sw * suu - su * su;
  if (!(std::abs(det) > 0.0)) {
    throw NumericError("fit_rate: singular normal equations");
  }
  report.slope = (sw * suy - su * sy) / det;
  report.intercept = (suu * sy - su * suy) / det;
  report.slope_se = std::sqrt(std::max(0.0, sw / det));
  return report;
}

std::string fit_to_json(const RateFitReport& report) {
  nlohmann::ordered_json j;
  j["points"] = nlohmann::ordered_json::array();
  for (const RateFitPoint& p : report.points) {
    j["points"].push_back({{"x", p.x}, {"mean_T", p.mean_T}, {"se_T", p.se_T}});
  }
  j["slope"] = report.slope;
  j["intercept"] = report.intercept;
  j["slope_se"] = report.slope_se;
  j["reference_C"] = report.reference_C;
  j["excluded_censored"] = report.excluded_censored;
  return j.dump(2) + "\n";
}

}  // namespace trapsim
