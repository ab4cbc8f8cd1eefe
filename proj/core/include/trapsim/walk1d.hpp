#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trapsim/increments.hpp"
#include "trapsim/rate.hpp"
#include "trapsim/rng.hpp"

namespace trapsim {

// The confined window is I_x = [a_x, 1 - a_x]; a_x >= x*y_max guarantees one
// step from inside I_x cannot leave [0,1]. Dynamics outside I_x are undefined:
// a run halts the moment it exits.
struct Walk1DConfig {
  IncrementFamily family;
  double x = 0.0;
  double a_x = 0.0;
  double w0 = 0.5;
  long long max_steps = 0;

  void validate() const;  // throws ConfigError naming the violated constraint
};

struct Walk1DState {
  double w = 0.0;
  long long t = 0;
};

enum class ExitSide { low, high, censored };

struct ExitRecord {
  long long tau = 0;
  ExitSide side = ExitSide::censored;
  double w_final = 0.0;
  double log_weight = 0.0;  // log likelihood ratio base/tilted; 0 for naive runs
};

struct ExitTimeSummary {
  long long n_runs = 0;
  std::string estimator;  // "naive" or "tilted(<delta>)"
  double x = 0.0;
  double mean_T = 0.0;
  double se_T = 0.0;
  double median_T = 0.0;
  long long min_T = 0;
  long long max_T = 0;
  long long censored = 0;  // runs that hit max_steps
  std::uint64_t seed = 0;
  bool all_censored_lower_bound = false;  // mean_T is then only a lower bound
};

struct ImportanceSummary {
  ExitTimeSummary summary;      // exit-time stats of the tilted trajectories
  double delta = 0.0;
  double exit_prob = 0.0;       // weighted estimate of P(tau <= max_steps) under the base law
  double exit_prob_se = 0.0;
  double ess = 0.0;             // effective sample size of the contributing weights
  long long discarded = 0;      // runs dropped by the likelihood-ratio overflow guard
  double tilted_exit_fraction = 0.0;  // raw uncensored fraction under the tilted law
};

double default_a_x(double x, double y_max);
long long default_max_steps(double C, double x);  // ceil(100*exp(1.5*C/x)), clamped to 1e8

// One transition w -> w + x*y, y ~ atoms(family, w). Caller must present a
// state inside I_x (ContractViolation otherwise). The result is clamped to
// [0,1] to absorb the at-most-one-ulp rounding at the extreme edges.
Walk1DState step(const Walk1DState& state, const Walk1DConfig& config, Rng& rng);

// Run from w0 until the state leaves I_x or max_steps is hit.
ExitRecord run_exit(const Walk1DConfig& config, Rng& rng);

// n_runs independent replicas; run i uses derive_seed(master_seed, i), so the
// summary is a pure function of (config, n_runs, master_seed). Censored runs
// enter the time statistics at tau = max_steps (a lower bound); if every run
// censors, the summary is flagged.
ExitTimeSummary mc_exit(const Walk1DConfig& config, long long n_runs,
                        std::uint64_t master_seed,
                        std::vector<ExitRecord>* records = nullptr);

// Replicas under the tilted kernel (drift pushed outward, reflected about
// 1/2). Each run accumulates its exact log likelihood ratio; the weighted
// indicator of exit-by-max_steps estimates the base-law exit probability
// unbiasedly. Runs whose |log weight| exceeds 700 are discarded and counted.
ImportanceSummary importance_exit(const Walk1DConfig& config,
                                  const RateProfile& profile, double delta,
                                  long long n_runs, std::uint64_t master_seed,
                                  std::vector<ExitRecord>* records = nullptr);

std::string runs_to_csv(const std::vector<ExitRecord>& records);
std::string summary_to_json(const ExitTimeSummary& summary);
std::string importance_to_json(const ImportanceSummary& summary);

}  // namespace trapsim
