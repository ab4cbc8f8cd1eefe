#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trapsim/config.hpp"
#include "trapsim/errors.hpp"
#include "trapsim/experiment.hpp"
#include "trapsim/io.hpp"

using namespace trapsim;
namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string& leaf) {
  const fs::path p = fs::temp_directory_path() / "trapsim_exp_test" / leaf;
  fs::remove_all(p);
  return p.string();
}

ExperimentConfig with_out(std::string text, const std::string& dir) {
  // reopen [experiment] so the destination lands in the right section
  return parse_config_text(text + "[experiment]\nout = " + dir + "\n", "test.cfg");
}

void clear_env() { unsetenv("TRAPSIM_OUT_DIR"); }

}  // namespace

TEST_CASE("a rate run writes its manifest first and reports sorted outputs") {
  clear_env();
  const std::string dir = fresh_dir("rate");
  const ExperimentConfig cfg = with_out(
      "[experiment]\nkind = rate\nmaster_seed = 5\n"
      "[family]\nid = binary\nkappa = 0.5\n"
      "[rate]\ngrid_size = 32\ntol = 1e-10\n",
      dir);
  const RunOutcome out = run_experiment(cfg);
  CHECK(out.out_dir == dir);
  CHECK(out.files == std::vector<std::string>{"manifest.json", "profile.csv",
                                              "profile.json"});
  CHECK(file_exists(dir + "/run_info.json"));  // present but never compared

  const auto m = nlohmann::json::parse(read_text_file(dir + "/manifest.json"));
  CHECK(m.at("tool") == "trapsim");
  CHECK(m.at("kind") == "rate");
  CHECK(m.at("master_seed") == 5);
  CHECK(m.at("preset").is_null());
  CHECK(m.at("out_dir_source") == "config");
  CHECK(m.at("config").at("rate.grid_size") == "32");
}

TEST_CASE("reruns of the same configuration are byte-identical") {
  clear_env();
  const std::string text =
      "[experiment]\nkind = rate\nmaster_seed = 11\n"
      "[family]\nid = trinary\nkappa = 0.5\nq = 0.2\n"
      "[rate]\ngrid_size = 32\n";
  const std::string d1 = fresh_dir("twin_a");
  const std::string d2 = fresh_dir("twin_b");
  const RunOutcome a = run_experiment(with_out(text, d1));
  const RunOutcome b = run_experiment(with_out(text, d2));
  REQUIRE(a.files == b.files);
  for (const std::string& name : a.files) {
    if (name == "manifest.json") continue;  // embeds the differing out path
    CHECK(read_text_file(d1 + "/" + name) == read_text_file(d2 + "/" + name));
  }
}

TEST_CASE("the environment override wins and is recorded") {
  const std::string dir = fresh_dir("env_override");
  setenv("TRAPSIM_OUT_DIR", dir.c_str(), 1);
  const ExperimentConfig cfg = with_out(
      "[experiment]\nkind = meanfield\nmaster_seed = 2\n"
      "[meanfield]\nn_min = 4\nn_max = 6\nn = 5\n",
      fresh_dir("env_ignored"));
  const RunOutcome out = run_experiment(cfg);
  clear_env();
  CHECK(out.out_dir == dir);
  const auto m = nlohmann::json::parse(read_text_file(dir + "/manifest.json"));
  CHECK(m.at("out_dir_source") == "env");
  CHECK(out.files == std::vector<std::string>{"linearization.json",
                                              "manifest.json", "scan.csv"});
}

TEST_CASE("a run with no destination anywhere is refused") {
  clear_env();
  const ExperimentConfig cfg = parse_config_text(
      "[experiment]\nkind = meanfield\nmaster_seed = 2\n", "test.cfg");
  CHECK_THROWS_WITH_AS((void)run_experiment(cfg),
                       doctest::Contains("no output directory"), ConfigError);
}

TEST_CASE("a mid-run failure leaves a FAILED marker next to partial outputs") {
  clear_env();
  const std::string dir = fresh_dir("failing");
  // the second cell's window floor sits below 0.3 * y_max, so its per-cell
  // validation throws after the first cell has already been written
  const ExperimentConfig cfg = with_out(
      "[experiment]\nkind = walk1d\nmaster_seed = 3\nn_runs = 5\n"
      "[family]\nid = binary\n"
      "[walk1d]\nx_list = 0.25, 0.3\na_x = 0.25\nw0 = 0.5\nmax_steps = 50\n"
      "estimator = naive\nfit = false\n",
      dir);
  CHECK_THROWS_AS((void)run_experiment(cfg), ConfigError);
  CHECK(file_exists(dir + "/FAILED"));
  CHECK(file_exists(dir + "/manifest.json"));
  CHECK(file_exists(dir + "/runs_x0.csv"));
  CHECK_FALSE(file_exists(dir + "/run_info.json"));
  CHECK(read_text_file(dir + "/FAILED").find("a_x") != std::string::npos);
}

TEST_CASE("walk1d with both estimators writes paired run files") {
  clear_env();
  const std::string dir = fresh_dir("walk_both");
  const ExperimentConfig cfg = with_out(
      "[experiment]\nkind = walk1d\nmaster_seed = 9\nn_runs = 20\n"
      "[family]\nid = binary\n"
      "[walk1d]\nx = 0.25\nw0 = 0.5\nmax_steps = 200\nestimator = both\n"
      "delta = 0.2\nprofile_grid = 64\nfit = false\n",
      dir);
  const RunOutcome out = run_experiment(cfg);
  CHECK(out.files == std::vector<std::string>{"manifest.json", "profile.json",
                                              "runs_tilted_x0.csv", "runs_x0.csv",
                                              "summary.json"});
  const auto s = nlohmann::json::parse(read_text_file(dir + "/summary.json"));
  REQUIRE(s.at("cells").size() == 1);
  REQUIRE(s.at("tilted_cells").size() == 1);
  CHECK(s.at("cells")[0].at("n_runs") == 20);
  const std::string runs = read_text_file(dir + "/runs_x0.csv");
  CHECK(runs.rfind("run_id,tau,side,log_weight\n", 0) == 0);
}

TEST_CASE("a three-scale naive walk produces a fit by default") {
  clear_env();
  const std::string dir = fresh_dir("walk_fit");
  const ExperimentConfig cfg = with_out(
      "[experiment]\nkind = walk1d\nmaster_seed = 21\nn_runs = 60\n"
      "[family]\nid = binary\n"
      "[walk1d]\nx_list = 0.25, 0.2, 0.125\nw0 = 0.5\nmax_steps = 20000\n"
      "estimator = naive\nprofile_grid = 64\n",
      dir);
  const RunOutcome out = run_experiment(cfg);
  CHECK(out.files == std::vector<std::string>{"fit.json", "manifest.json",
                                              "profile.json", "runs_x0.csv",
                                              "runs_x1.csv", "runs_x2.csv",
                                              "summary.json"});
  const auto fit = nlohmann::json::parse(read_text_file(dir + "/fit.json"));
  CHECK(fit.at("slope").get<double>() > 0.0);
}

TEST_CASE("urn runs log a trajectory and a consistency summary") {
  clear_env();
  const std::string dir = fresh_dir("urn");
  const ExperimentConfig cfg = with_out(
      "[experiment]\nkind = urn\nmaster_seed = 13\n"
      "[urn]\nred0 = 4\nblack0 = 9\nx = 0.1\nsteps = 500\nlog_stride = 100\n",
      dir);
  const RunOutcome out = run_experiment(cfg);
  CHECK(out.files == std::vector<std::string>{"manifest.json", "summary.json",
                                              "trajectory.csv"});
  const std::string csv = read_text_file(dir + "/trajectory.csv");
  CHECK(csv.rfind("t,red,black,fraction\n", 0) == 0);
  const auto s = nlohmann::json::parse(read_text_file(dir + "/summary.json"));
  CHECK(s.at("steps") == 500);
  CHECK(s.at("final_total").get<double>() > 0.0);
}

TEST_CASE("network ensembles summarize trap counts per discount rate") {
  clear_env();
  const std::string dir = fresh_dir("network");
  const ExperimentConfig cfg = with_out(
      "[experiment]\nkind = network\nmaster_seed = 31\nn_runs = 3\n"
      "[network]\nN = 5\nx_list = 0.3, 0.2\nmax_steps = 40\nthreshold = 1e-4\n"
      "persistence = 10\ninit = stationary\nrule = product_all_pairs\n",
      dir);
  const RunOutcome out = run_experiment(cfg);
  CHECK(out.files == std::vector<std::string>{"manifest.json", "runs_x0.csv",
                                              "runs_x1.csv", "summary.json"});
  const auto s = nlohmann::json::parse(read_text_file(dir + "/summary.json"));
  CHECK(s.at("N") == 5);
  REQUIRE(s.at("cells").size() == 2);
  CHECK(s.at("cells")[0].at("runs").size() == 3);
  const std::string csv = read_text_file(dir + "/runs_x0.csv");
  CHECK(csv.rfind("run_id,trapped,detected_at,steps_taken,cross_weight_fraction,"
                  "block_sizes,blocks\n",
                  0) == 0);
}

TEST_CASE("a single logged network run also writes its trajectory") {
  clear_env();
  const std::string dir = fresh_dir("network_log");
  const ExperimentConfig cfg = with_out(
      "[experiment]\nkind = network\nmaster_seed = 31\nn_runs = 1\n"
      "[network]\nN = 5\nx = 0.3\nmax_steps = 40\nthreshold = 1e-4\n"
      "persistence = 10\nlog_stride = 10\n",
      dir);
  const RunOutcome out = run_experiment(cfg);
  CHECK(out.files == std::vector<std::string>{"manifest.json", "runs_x0.csv",
                                              "summary.json", "trajectory.csv"});
  const std::string csv = read_text_file(dir + "/trajectory.csv");
  CHECK(csv.rfind("t,S_t,cross_weight_fraction,trapped_flag\n", 0) == 0);
}

TEST_CASE("certificate runs serialize the verdict") {
  clear_env();
  const std::string dir = fresh_dir("certificate");
  const ExperimentConfig cfg = with_out(
      "[experiment]\nkind = certificate\nmaster_seed = 123\n"
      "[certificate]\nN = 5\nx = 0.05\nradius = 0.03\ngrid_resolution = 3\n",
      dir);
  const RunOutcome out = run_experiment(cfg);
  CHECK(out.files == std::vector<std::string>{"certificate.json", "manifest.json"});
  const auto c = nlohmann::json::parse(read_text_file(dir + "/certificate.json"));
  CHECK(c.contains("verified"));
  CHECK(c.at("n") == 4);
}

TEST_CASE("presets are runnable once seed and destination are supplied") {
  clear_env();
  const std::string dir = fresh_dir("preset_run");
  ExperimentConfig cfg = preset("spectrum-scan");
  cfg.master_seed = 1;
  cfg.seed_set = true;
  cfg.out_dir = dir;
  const RunOutcome out = run_experiment(cfg);
  CHECK(out.files == std::vector<std::string>{"linearization.json",
                                              "manifest.json", "scan.csv"});
  const auto m = nlohmann::json::parse(read_text_file(dir + "/manifest.json"));
  CHECK(m.at("preset") == "spectrum-scan");
}
