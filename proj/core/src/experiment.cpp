#include "trapsim/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trapsim/errors.hpp"
#include "trapsim/exit_oracle.hpp"
#include "trapsim/fit.hpp"
#include "trapsim/increments.hpp"
#include "trapsim/io.hpp"
#include "trapsim/meanfield.hpp"
#include "trapsim/rate.hpp"
#include "trapsim/rng.hpp"
#include "trapsim/triad.hpp"
#include "trapsim/urn.hpp"
#include "trapsim/version.hpp"
#include "trapsim/walk1d.hpp"

namespace trapsim {

namespace {

using nlohmann::json;

IncrementFamily family_from_config(const ExperimentConfig& config) {
  std::map<std::string, double> params;
  if (config.has("family.kappa")) params["kappa"] = config.get_double("family.kappa", 0.5);
  if (config.has("family.q")) params["q"] = config.get_double("family.q", 0.2);
  return family_from_id(config.get_string("family.id", "binary"), params);
}

std::vector<double> x_values(const ExperimentConfig& config, const std::string& section) {
  std::vector<double> xs = config.get_double_list(section + ".x_list");
  if (xs.empty() && config.has(section + ".x")) {
    xs.push_back(config.get_double(section + ".x", 0.0));
  }
  return xs;
}

struct Writer {
  std::string dir;
  std::vector<std::string> files;

  void text(const std::string& name, const std::string& content) {
    write_text_file(dir + "/" + name, content);
    files.push_back(name);
  }
  void js(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }
};

void run_rate(const ExperimentConfig& config, Writer& w) {
  const IncrementFamily fam = family_from_config(config);
  const RateProfile profile =
      build_profile(fam, static_cast<int>(config.get_int("rate.grid_size", 512)),
                    config.get_double("rate.tol", 1e-10));
  w.text("profile.csv", profile_to_csv(profile));
  w.text("profile.json", profile_to_json(profile));
}

void run_walk1d(const ExperimentConfig& config, Writer& w) {
  const IncrementFamily fam = family_from_config(config);
  const std::vector<double> xs = x_values(config, "walk1d");
  const std::string estimator = config.get_string("walk1d.estimator", "naive");
  const bool naive_on = estimator == "naive" || estimator == "both";
  const bool tilted_on = estimator == "tilted" || estimator == "both";
  const bool want_fit =
      config.get_bool("walk1d.fit", xs.size() >= 3 && naive_on);
  const bool need_profile = want_fit || tilted_on || !config.has("walk1d.max_steps");

  RateProfile profile;
  if (need_profile) {
    profile = build_profile(
        fam, static_cast<int>(config.get_int("walk1d.profile_grid", 512)),
        config.get_double("walk1d.profile_tol", 1e-10));
    w.text("profile.json", profile_to_json(profile));
  }

  json cells = json::array();
  json tilted_cells = json::array();
  std::vector<ExitTimeSummary> naive_summaries;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    Walk1DConfig wc;
    wc.family = fam;
    wc.x = x;
    wc.a_x = config.has("walk1d.a_x") ? config.get_double("walk1d.a_x", 0.0)
                                      : default_a_x(x, fam.y_max);
    wc.w0 = config.get_double("walk1d.w0", 0.5);
    wc.max_steps = config.has("walk1d.max_steps")
                       ? config.get_int("walk1d.max_steps", 0)
                       : default_max_steps(profile.C, x);
    wc.validate();
    const std::string tag = "_x" + std::to_string(i);
    if (naive_on) {
      std::vector<ExitRecord> records;
      const ExitTimeSummary s =
          mc_exit(wc, config.n_runs, derive_seed(config.master_seed, i), &records);
      w.text("runs" + tag + ".csv", runs_to_csv(records));
      cells.push_back(json::parse(summary_to_json(s)));
      naive_summaries.push_back(s);
    }
    if (tilted_on) {
      std::vector<ExitRecord> records;
      const ImportanceSummary s = importance_exit(
          wc, profile, config.get_double("walk1d.delta", 0.2), config.n_runs,
          derive_seed(config.master_seed, 1000000 + i), &records);
      w.text("runs_tilted" + tag + ".csv", runs_to_csv(records));
      tilted_cells.push_back(json::parse(importance_to_json(s)));
    }
  }
  json summary;
  summary["cells"] = cells;
  if (tilted_on) summary["tilted_cells"] = tilted_cells;
  w.js("summary.json", summary);
  if (want_fit) {
    const RateFitReport fit = fit_rate(naive_summaries, profile);
    w.text("fit.json", fit_to_json(fit));
  }
}

void run_urn(const ExperimentConfig& config, Writer& w) {
  const double x = config.get_double("urn.x", 0.0);
  const long long steps = config.get_int("urn.steps", 0);
  const long long stride =
      config.get_int("urn.log_stride", std::max<long long>(1, steps / 1000));
  UrnState state;
  state.red = config.get_double("urn.red0", 1.0);
  state.black = config.get_double("urn.black0", 1.0);
  Rng rng(derive_seed(config.master_seed, 0));
  std::string csv = "t,red,black,fraction\n";
  auto log_row = [&](const UrnState& s) {
    csv += std::to_string(s.t) + "," + fmt17(s.red) + "," + fmt17(s.black) + "," +
           fmt17(s.fraction()) + "\n";
  };
  log_row(state);
  double frac_sum = 0.0;
  long long frac_count = 0;
  for (long long t = 1; t <= steps; ++t) {
    state = urn_step(state, x, rng);
    if (t % stride == 0 || t == steps) log_row(state);
    if (t > steps / 2) {
      frac_sum += state.fraction();
      ++frac_count;
    }
  }
  w.text("trajectory.csv", csv);
  json summary;
  summary["x"] = x;
  summary["steps"] = steps;
  summary["final_red"] = state.red;
  summary["final_black"] = state.black;
  summary["final_fraction"] = state.fraction();
  summary["final_total"] = state.total();
  summary["mean_fraction_last_half"] = frac_count ? frac_sum / frac_count : 0.0;
  summary["stationary_total_at_final_fraction"] =
      urn_stationary_total(state.fraction(), x);
  w.js("summary.json", summary);
}

void run_network(const ExperimentConfig& config, Writer& w) {
  const int N = static_cast<int>(config.get_int("network.N", 0));
  const std::vector<double> xs = x_values(config, "network");
  const long long max_steps = config.get_int("network.max_steps", 0);
  const double threshold = config.get_double("network.threshold", 1e-4);
  const int persistence = static_cast<int>(config.get_int("network.persistence", 1));
  const InitMode mode = config.get_string("network.init", "stationary") == "unit"
                            ? InitMode::unit
                            : InitMode::stationary;
  const TrioRule rule =
      config.get_string("network.rule", "product_all_pairs") == "chooser_pairs_only"
          ? TrioRule::chooser_pairs_only
          : TrioRule::product_all_pairs;
  const bool decay_after_add = config.get_bool("network.decay_after_add", false);
  const int log_stride = static_cast<int>(config.get_int("network.log_stride", 0));

  json cells = json::array();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const std::uint64_t cell_master = derive_seed(config.master_seed, i);
    std::string csv =
        "run_id,trapped,detected_at,steps_taken,cross_weight_fraction,block_sizes,blocks\n";
    long long trapped_count = 0;
    std::vector<long long> detected;
    json runs = json::array();
    for (long long r = 0; r < config.n_runs; ++r) {
      NetworkState state = init_state(N, x, mode);
      state.rule = rule;
      state.decay_after_add = decay_after_add;
      Rng rng(derive_seed(cell_master, r));
      const bool log_this = log_stride > 0 && r == 0 && config.n_runs == 1;
      const TrapRunResult res = run_until_trap(std::move(state), max_steps, threshold,
                                               persistence, rng, log_this ? log_stride : 0);
      std::string sizes;
      std::string blocks;
      for (std::size_t b = 0; b < res.report.blocks.size(); ++b) {
        if (b) {
          sizes += ";";
          blocks += "|";
        }
        sizes += std::to_string(res.report.block_sizes[b]);
        for (std::size_t m = 0; m < res.report.blocks[b].size(); ++m) {
          if (m) blocks += " ";
          blocks += std::to_string(res.report.blocks[b][m]);
        }
      }
      csv += std::to_string(r) + "," + (res.report.trapped ? "1" : "0") + "," +
             std::to_string(res.report.detected_at) + "," +
             std::to_string(res.steps_taken) + "," +
             fmt17(res.report.cross_weight_fraction) + "," + sizes + "," + blocks + "\n";
      if (res.report.trapped) {
        ++trapped_count;
        detected.push_back(res.report.detected_at);
      }
      json jr;
      jr["run_id"] = r;
      jr["trapped"] = res.report.trapped;
      jr["detected_at"] = res.report.detected_at;
      jr["steps_taken"] = res.steps_taken;
      jr["block_sizes"] = res.report.block_sizes;
      jr["blocks"] = res.report.blocks;
      jr["cross_weight_fraction"] = res.report.cross_weight_fraction;
      runs.push_back(jr);
      if (log_this) w.text("trajectory.csv", trajectory_to_csv(res.log));
    }
    const std::string tag = "_x" + std::to_string(i);
    w.text("runs" + tag + ".csv", csv);
    json cell;
    cell["x"] = x;
    cell["n_runs"] = config.n_runs;
    cell["trapped_count"] = trapped_count;
    cell["trapped_fraction"] =
        config.n_runs ? static_cast<double>(trapped_count) / config.n_runs : 0.0;
    if (!detected.empty()) {
      std::sort(detected.begin(), detected.end());
      cell["median_detected_at"] = detected[detected.size() / 2];
    }
    cell["runs"] = runs;
    cells.push_back(cell);
  }
  json summary;
  summary["N"] = N;
  summary["cells"] = cells;
  w.js("summary.json", summary);
}

void run_meanfield(const ExperimentConfig& config, Writer& w) {
  const int n_min = static_cast<int>(config.get_int("meanfield.n_min", 4));
  const int n_max = static_cast<int>(config.get_int("meanfield.n_max", 40));
  const int n = static_cast<int>(config.get_int("meanfield.n", 5));
  w.text("scan.csv", spectrum_scan_to_csv(n_min, n_max));
  w.text("linearization.json", linearization_to_json(spectrum(n)));
}

void run_certificate(const ExperimentConfig& config, Writer& w) {
  const int N = static_cast<int>(config.get_int("certificate.N", 0));
  const TrioRule rule =
      config.get_string("certificate.rule", "product_all_pairs") == "chooser_pairs_only"
          ? TrioRule::chooser_pairs_only
          : TrioRule::product_all_pairs;
  const LyapunovCertificate cert = lyapunov_certificate(
      N - 1, config.get_double("certificate.x", 0.0),
      config.get_double("certificate.radius", 0.0),
      static_cast<int>(config.get_int("certificate.grid_resolution", 0)),
      config.master_seed, rule);
  w.text("certificate.json", certificate_to_json(cert));
}

}  // namespace

std::string manifest_json(const ExperimentConfig& config, const std::string& out_source) {
  json m;
  m["tool"] = "trapsim";
  m["version"] = k_version;
  m["kind"] = config.kind;
  m["preset"] = config.preset_name.empty() ? json() : json(config.preset_name);
  m["master_seed"] = config.master_seed;
  m["n_runs"] = config.n_runs;
  m["out_dir_source"] = out_source;
  json entries = json::object();
  for (const auto& [key, value] : config.entries) entries[key] = value;
  m["config"] = entries;
  return m.dump(2) + "\n";
}

RunOutcome run_experiment(const ExperimentConfig& config) {
  validate(config);
  std::string out_source = "config";
  std::string out_dir = config.out_dir;
  if (const char* env = std::getenv("TRAPSIM_OUT_DIR"); env && *env) {
    out_dir = env;
    out_source = "env";
  }
  if (out_dir.empty()) {
    throw ConfigError(config.source +
                      ": no output directory (set experiment.out, --out, or TRAPSIM_OUT_DIR)");
  }
  ensure_dir(out_dir);

  Writer w;
  w.dir = out_dir;
  w.text("manifest.json", manifest_json(config, out_source));
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (config.kind == "rate") {
      run_rate(config, w);
    } else if (config.kind == "walk1d") {
      run_walk1d(config, w);
    } else if (config.kind == "urn") {
      run_urn(config, w);
    } else if (config.kind == "network") {
      run_network(config, w);
    } else if (config.kind == "meanfield") {
      run_meanfield(config, w);
    } else if (config.kind == "certificate") {
      run_certificate(config, w);
    } else {
      throw ConfigError("unknown experiment kind '" + config.kind + "'");
    }
  } catch (const std::exception& e) {
    write_text_file(out_dir + "/FAILED", std::string(e.what()) + "\n");
    throw;
  }
  const auto t1 = std::chrono::steady_clock::now();
  json info;
  info["wall_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  write_text_file(out_dir + "/run_info.json", info.dump(2) + "\n");

  RunOutcome outcome;
  outcome.out_dir = out_dir;
  std::sort(w.files.begin(), w.files.end());
  outcome.files = w.files;
  return outcome;
}

}  // namespace trapsim
