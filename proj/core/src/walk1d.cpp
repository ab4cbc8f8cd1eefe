#include "trapsim/walk1d.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "trapsim/errors.hpp"
#include "trapsim/io.hpp"

namespace trapsim {

namespace {

bool inside_window(double w, const Walk1DConfig& c) {
  return w >= c.a_x && w <= 1.0 - c.a_x;
}

const char* side_name(ExitSide side) {
  switch (side) {
    case ExitSide::low: return "low";
    case ExitSide::high: return "high";
    default: return "censored";
  }
}

ExitTimeSummary summarize(const std::vector<ExitRecord>& records,
                          const std::string& estimator, double x,
                          std::uint64_t seed, long long max_steps) {
  ExitTimeSummary s;
  s.n_runs = static_cast<long long>(records.size());
  s.estimator = estimator;
  s.x = x;
  s.seed = seed;
  if (records.empty()) {
    return s;
  }
  std::vector<long long> taus;
  taus.reserve(records.size());
  double sum = 0.0;
  for (const ExitRecord& r : records) {
    taus.push_back(r.tau);
    sum += static_cast<double>(r.tau);
    if (r.side == ExitSide::censored) {
      ++s.censored;
    }
  }
  const double n = static_cast<double>(taus.size());
  s.mean_T = sum / n;
  double ss = 0.0;
  for (long long tau : taus) {
    const double d = static_cast<double>(tau) - s.mean_T;
    ss += d * d;
  }
  s.se_T = taus.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  std::sort(taus.begin(), taus.end());
  s.min_T = taus.front();
  s.max_T = taus.back();
  s.median_T = (taus.size() % 2 == 1)
                   ? static_cast<double>(taus[taus.size() / 2])
                   : 0.5 * (static_cast<double>(taus[taus.size() / 2 - 1]) +
                            static_cast<double>(taus[taus.size() / 2]));
  s.all_censored_lower_bound = (s.censored == s.n_runs) && max_steps > 0;
  return s;
}

}  // namespace

double default_a_x(double x, double y_max) { return std::max(x * y_max, 0.02); }

long long default_max_steps(double C, double x) {
  const double raw = std::ceil(100.0 * std::exp(1.5 * C / x));
  return static_cast<long long>(std::min(raw, 1e8));
}

void Walk1DConfig::validate() const {
  if (!(x > 0.0 && x < 1.0)) {
    throw ConfigError("walk1d: x must lie in (0,1), got " + fmt17(x));
  }
  if (!(a_x > 0.0 && a_x < 0.5)) {
    throw ConfigError("walk1d: a_x must lie in (0, 1/2), got " + fmt17(a_x));
  }
  if (a_x < x * family.y_max - 1e-15) {
    throw ConfigError("walk1d: a_x must be >= x*y_max so one step cannot leave "
                      "[0,1] (a_x = " + fmt17(a_x) + ", x*y_max = " +
                      fmt17(x * family.y_max) + ")");
  }
  if (!(w0 >= a_x && w0 <= 1.0 - a_x)) {
    throw ConfigError("walk1d: w0 must lie inside I_x = [a_x, 1-a_x], got " +
                      fmt17(w0));
  }
  if (max_steps < 0) {
    throw ConfigError("walk1d: max_steps must be >= 0");
  }
}

Walk1DState step(const Walk1DState& state, const Walk1DConfig& config, Rng& rng) {
  if (!inside_window(state.w, config)) {
    throw ContractViolation("walk1d::step called with w outside I_x: w = " +
                            fmt17(state.w));
  }
  const double y = sample(config.family, state.w, rng);
  Walk1DState next;
  next.w = std::clamp(state.w + config.x * y, 0.0, 1.0);
  next.t = state.t + 1;
  return next;
}

ExitRecord run_exit(const Walk1DConfig& config, Rng& rng) {
  Walk1DState state{config.w0, 0};
  while (true) {
    if (state.t >= config.max_steps) {
      return {state.t, ExitSide::censored, state.w, 0.0};
    }
    state = step(state, config, rng);
    if (!inside_window(state.w, config)) {
      const ExitSide side = state.w < config.a_x ? ExitSide::low : ExitSide::high;
      return {state.t, side, state.w, 0.0};
    }
  }
}

ExitTimeSummary mc_exit(const Walk1DConfig& config, long long n_runs,
                        std::uint64_t master_seed,
                        std::vector<ExitRecord>* records) {
  config.validate();
  if (n_runs < 1) {
    throw ConfigError("mc_exit: n_runs must be >= 1");
  }
  std::vector<ExitRecord> recs;
  recs.reserve(n_runs);
  for (long long i = 0; i < n_runs; ++i) {
    Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(i)));
    recs.push_back(run_exit(config, rng));
  }
  ExitTimeSummary s = summarize(recs, "naive", config.x, master_seed, config.max_steps);
  if (records) {
    *records = std::move(recs);
  }
  return s;
}

ImportanceSummary importance_exit(const Walk1DConfig& config,
                                  const RateProfile& profile, double delta,
                                  long long n_runs, std::uint64_t master_seed,
                                  std::vector<ExitRecord>* records) {
  config.validate();
  if (n_runs < 1) {
    throw ConfigError("importance_exit: n_runs must be >= 1");
  }
  if (profile.family_id != config.family.family_id ||
      profile.parameters != config.family.parameters) {
    throw DomainError("importance_exit: profile was built for family '" +
                      profile.family_id + "' which does not match the config");
  }
  const double theta = (1.0 + delta) / config.x;
  std::vector<ExitRecord> recs;
  recs.reserve(n_runs);
  std::vector<double> contributions;  // weight * exit indicator, kept runs only
  contributions.reserve(n_runs);
  double w_sum = 0.0, w2_sum = 0.0;  // over exited kept runs, for the ESS
  long long discarded = 0;
  long long exited = 0;

  for (long long i = 0; i < n_runs; ++i) {
    Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(i)));
    Walk1DState state{config.w0, 0};
    double log_lr = 0.0;  // log dP/dPtilde accumulated per step
    ExitRecord rec;
    while (true) {
      if (state.t >= config.max_steps) {
        rec = {state.t, ExitSide::censored, state.w, log_lr};
        break;
      }
      const TiltedKernel kernel =
          tilt_kernel(config.family, profile, state.w, config.x, delta);
      const double y = sample_atoms(kernel.atoms, rng);
      const double before = biglambda_reflected(profile, state.w);
      state.w = std::clamp(state.w + config.x * y, 0.0, 1.0);
      state.t += 1;
      const double after = biglambda_reflected(profile, state.w);
      // P(y)/Ptilde(y) = Z * exp(-theta * dLambda) with Z the kernel normalizer.
      log_lr += kernel.log_normalizer - theta * (after - before);
      if (!inside_window(state.w, config)) {
        rec = {state.t, state.w < config.a_x ? ExitSide::low : ExitSide::high,
               state.w, log_lr};
        break;
      }
    }
    recs.push_back(rec);
    if (std::abs(rec.log_weight) > 700.0) {
      ++discarded;
      continue;
    }
    const bool is_exit = rec.side != ExitSide::censored;
    const double weight = std::exp(rec.log_weight);
    contributions.push_back(is_exit ? weight : 0.0);
    if (is_exit) {
      ++exited;
      w_sum += weight;
      w2_sum += weight * weight;
    }
  }

  ImportanceSummary out;
  out.delta = delta;
  out.summary = summarize(recs, "tilted(" + fmt17(delta) + ")", config.x,
                          master_seed, config.max_steps);
  out.discarded = discarded;
  const double kept = static_cast<double>(contributions.size());
  if (kept > 0.0) {
    double sum = 0.0;
    for (double c : contributions) {
      sum += c;
    }
    out.exit_prob = sum / kept;
    double ss = 0.0;
    for (double c : contributions) {
      ss += (c - out.exit_prob) * (c - out.exit_prob);
    }
    out.exit_prob_se = kept > 1.0 ? std::sqrt(ss / (kept - 1.0) / kept) : 0.0;
    out.tilted_exit_fraction = static_cast<double>(exited) / kept;
  }
  out.ess = w2_sum > 0.0 ? (w_sum * w_sum) / w2_sum : 0.0;
  if (records) {
    *records = std::move(recs);
  }
  return out;
}

std::string runs_to_csv(const std::vector<ExitRecord>& records) {
  std::string csv = "run_id,tau,side,log_weight\n";
  for (size_t i = 0; i < records.size(); ++i) {
    csv += std::to_string(i);
    csv += ',';
    csv += std::to_string(records[i].tau);
    csv += ',';
    csv += side_name(records[i].side);
    csv += ',';
    csv += fmt17(records[i].log_weight);
    csv += '\n';
  }
  return csv;
}

namespace {

nlohmann::ordered_json summary_json(const ExitTimeSummary& s) {
  nlohmann::ordered_json j;
  j["n_runs"] = s.n_runs;
  j["estimator"] = s.estimator;
  j["x"] = s.x;
  j["mean_T"] = s.mean_T;
  j["se_T"] = s.se_T;
  j["median_T"] = s.median_T;
  j["min_T"] = s.min_T;
  j["max_T"] = s.max_T;
  j["censored"] = s.censored;
  j["seed"] = s.seed;
  j["all_censored_lower_bound"] = s.all_censored_lower_bound;
  return j;
}

}  // namespace

std::string summary_to_json(const ExitTimeSummary& summary) {
  return summary_json(summary).dump(2) + "\n";
}

std::string importance_to_json(const ImportanceSummary& summary) {
  nlohmann::ordered_json j;
  j["summary"] = summary_json(summary.summary);
  j["delta"] = summary.delta;
  j["exit_prob"] = summary.exit_prob;
  j["exit_prob_se"] = summary.exit_prob_se;
  j["ess"] = summary.ess;
  j["discarded"] = summary.discarded;
  j["tilted_exit_fraction"] = summary.tilted_exit_fraction;
  return j.dump(2) + "\n";
}

}  // namespace trapsim
