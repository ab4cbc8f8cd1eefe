#include "trapsim/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <set>
#include <sstream>

#include "trapsim/errors.hpp"
#include "trapsim/io.hpp"

namespace trapsim {

namespace {

[[noreturn]] void fail_at(const std::string& source, int line, const std::string& message) {
  throw ConfigError(source + ":" + std::to_string(line) + ": " + message);
}

double parse_double_or_fail(const ExperimentConfig& cfg, const std::string& key,
                            const std::string& raw) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0' || errno == ERANGE) {
    cfg.fail(key, "not a number: '" + raw + "'");
  }
  return v;
}

const std::set<std::string>& allowed_keys(const std::string& kind) {
  static const std::set<std::string> common = {
      "experiment.kind", "experiment.master_seed", "experiment.n_runs",
      "experiment.out"};
  static const std::set<std::string> family = {"family.id", "family.kappa",
                                               "family.q"};
  static std::map<std::string, std::set<std::string>> table;
  if (table.empty()) {
    auto add = [&](const std::string& k, std::set<std::string> extra,
                   bool with_family) {
      std::set<std::string> s = common;
      if (with_family) s.insert(family.begin(), family.end());
      s.insert(extra.begin(), extra.end());
      table[k] = std::move(s);
    };
    add("rate", {"rate.grid_size", "rate.tol"}, true);
    add("walk1d",
        {"walk1d.x", "walk1d.x_list", "walk1d.a_x", "walk1d.w0",
         "walk1d.max_steps", "walk1d.estimator", "walk1d.delta", "walk1d.fit",
         "walk1d.profile_grid", "walk1d.profile_tol"},
        true);
    add("urn", {"urn.red0", "urn.black0", "urn.x", "urn.steps", "urn.log_stride"},
        false);
    add("network",
        {"network.N", "network.x", "network.x_list", "network.max_steps",
         "network.threshold", "network.persistence", "network.init",
         "network.rule", "network.decay_after_add", "network.log_stride"},
        false);
    add("meanfield", {"meanfield.n", "meanfield.n_min", "meanfield.n_max"}, false);
    add("certificate",
        {"certificate.N", "certificate.x", "certificate.radius",
         "certificate.grid_resolution", "certificate.rule"},
        false);
  }
  auto it = table.find(kind);
  if (it == table.end()) {
    throw ConfigError("unknown experiment kind '" + kind + "'");
  }
  return it->second;
}

struct PresetText {
  const char* name;
  const char* text;
};

// x_list values below are exact doubles for 1/4, 1/6, 1/8, 1/10.
const PresetText k_presets[] = {
    {"theorem31-trend",
     "# Exit-time growth trend: binary drift-toward-balance family across four\n"
     "# step scales, ending in the weighted log-linear fit of mean exit time.\n"
     "[experiment]\n"
     "kind = walk1d\n"
     "n_runs = 2000\n"
     "\n"
     "[family]\n"
     "id = binary\n"
     "kappa = 0.5\n"
     "\n"
     "[walk1d]\n"
     "x_list = 0.25, 0.16666666666666666, 0.125, 0.1\n"
     "w0 = 0.5\n"
     "max_steps = 100000\n"
     "estimator = naive\n"
     "fit = true\n"},
    {"threes-company-N6",
     "# Six-agent trio-reinforcement ensembles at two discount rates, run until\n"
     "# a persistent weight partition is detected or the step budget ends.\n"
     "[experiment]\n"
     "kind = network\n"
     "n_runs = 100\n"
     "\n"
     "[network]\n"
     "N = 6\n"
     "x_list = 0.4, 0.2\n"
     "max_steps = 5000\n"
     "threshold = 1e-4\n"
     "persistence = 200\n"
     "init = stationary\n"
     "rule = product_all_pairs\n"},
    {"spectrum-scan",
     "# Linearized stability of the symmetric point across population sizes.\n"
     "[experiment]\n"
     "kind = meanfield\n"
     "\n"
     "[meanfield]\n"
     "n_min = 4\n"
     "n_max = 40\n"
     "n = 5\n"},
    {"certificate-N6",
     "# Quadratic Lyapunov certificate attempt at the pinned six-agent setup.\n"
     "[experiment]\n"
     "kind = certificate\n"
     "\n"
     "[certificate]\n"
     "N = 6\n"
     "x = 0.05\n"
     "radius = 0.02\n"
     "grid_resolution = 500\n"
     "rule = product_all_pairs\n"},
};

}  // namespace

bool ExperimentConfig::has(const std::string& key) const {
  return entries.count(key) != 0;
}

std::string ExperimentConfig::get_string(const std::string& key,
                                         const std::string& fallback) const {
  auto it = entries.find(key);
  return it == entries.end() ? fallback : it->second;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  auto it = entries.find(key);
  if (it == entries.end()) return fallback;
  return parse_double_or_fail(*this, key, it->second);
}

long long ExperimentConfig::get_int(const std::string& key, long long fallback) const {
  auto it = entries.find(key);
  if (it == entries.end()) return fallback;
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0' || errno == ERANGE) {
    fail(key, "not an integer: '" + it->second + "'");
  }
  return v;
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = entries.find(key);
  if (it == entries.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(key, "not a boolean (true/false): '" + v + "'");
}

std::vector<double> ExperimentConfig::get_double_list(const std::string& key) const {
  auto it = entries.find(key);
  if (it == entries.end()) return {};
  std::vector<double> out;
  for (const std::string& piece : split_trimmed(it->second, ',')) {
    if (piece.empty()) fail(key, "empty element in list");
    out.push_back(parse_double_or_fail(*this, key, piece));
  }
  return out;
}

void ExperimentConfig::fail(const std::string& key, const std::string& why) const {
  auto it = entry_lines.find(key);
  const int line = it == entry_lines.end() ? 0 : it->second;
  fail_at(source, line, key + ": " + why);
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& source) {
  ExperimentConfig cfg;
  cfg.source = source;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        fail_at(source, line_no, "malformed section header: '" + line + "'");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail_at(source, line_no, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail_at(source, line_no, "expected 'key = value': '" + line + "'");
    }
    const std::string key_part = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key_part.empty()) fail_at(source, line_no, "empty key");
    if (section.empty()) {
      fail_at(source, line_no, "key '" + key_part + "' appears before any [section]");
    }
    const std::string key = section + "." + key_part;
    if (cfg.entries.count(key)) {
      fail_at(source, line_no,
              "duplicate key '" + key + "' (first at line " +
                  std::to_string(cfg.entry_lines[key]) + ")");
    }
    cfg.entries[key] = value;
    cfg.entry_lines[key] = line_no;
  }

  cfg.kind = cfg.get_string("experiment.kind", "");
  if (cfg.has("experiment.master_seed")) {
    const std::string& raw_seed = cfg.entries.at("experiment.master_seed");
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(raw_seed.c_str(), &end, 10);
    if (end == raw_seed.c_str() || *end != '\0' || errno == ERANGE ||
        raw_seed.find('-') != std::string::npos) {
      cfg.fail("experiment.master_seed",
               "not an unsigned 64-bit integer: '" + raw_seed + "'");
    }
    cfg.master_seed = v;
    cfg.seed_set = true;
  }
  cfg.n_runs = cfg.get_int("experiment.n_runs", 1);
  cfg.out_dir = cfg.get_string("experiment.out", "");
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  if (!file_exists(path)) {
    throw ConfigError("config file not found: " + path);
  }
  return parse_config_text(read_text_file(path), path);
}

ExperimentConfig preset(const std::string& name) {
  for (const PresetText& p : k_presets) {
    if (name == p.name) {
      ExperimentConfig cfg = parse_config_text(p.text, "preset:" + name);
      cfg.preset_name = name;
      return cfg;
    }
  }
  std::string msg = "unknown preset '" + name + "'; available:";
  for (const std::string& n : preset_names()) msg += " " + n;
  throw ConfigError(msg);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const PresetText& p : k_presets) names.push_back(p.name);
  std::sort(names.begin(), names.end());
  return names;
}

void validate(const ExperimentConfig& config) {
  if (config.kind.empty()) {
    throw ConfigError(config.source + ": experiment.kind is required");
  }
  const std::set<std::string>& allowed = allowed_keys(config.kind);  // checks kind
  for (const auto& [key, value] : config.entries) {
    (void)value;
    if (!allowed.count(key)) {
      auto it = config.entry_lines.find(key);
      fail_at(config.source, it == config.entry_lines.end() ? 0 : it->second,
              "unknown key '" + key + "' for kind '" + config.kind + "'");
    }
  }
  if (!config.seed_set) {
    throw ConfigError(config.source +
                      ": experiment.master_seed is required (seeds never default)");
  }
  if (config.n_runs < 1) config.fail("experiment.n_runs", "must be >= 1");

  auto check_family = [&] {
    const std::string id = config.get_string("family.id", "binary");
    if (id != "binary" && id != "trinary") {
      config.fail("family.id", "unknown family '" + id + "'");
    }
    const double kappa = config.get_double("family.kappa", 0.5);
    if (!(kappa > 0.0 && kappa <= 1.0)) {
      config.fail("family.kappa", "must lie in (0, 1]");
    }
    if (id == "trinary") {
      const double q = config.get_double("family.q", 0.2);
      if (!(q >= 0.0 && q < 1.0)) config.fail("family.q", "must lie in [0, 1)");
    }
  };

  if (config.kind == "rate") {
    check_family();
    if (config.get_int("rate.grid_size", 512) < 16) {
      config.fail("rate.grid_size", "must be >= 16");
    }
    if (!(config.get_double("rate.tol", 1e-10) > 0.0)) {
      config.fail("rate.tol", "must be > 0");
    }
  } else if (config.kind == "walk1d") {
    check_family();
    std::vector<double> xs = config.get_double_list("walk1d.x_list");
    if (xs.empty() && config.has("walk1d.x")) {
      xs.push_back(config.get_double("walk1d.x", 0.0));
    }
    if (xs.empty()) {
      throw ConfigError(config.source + ": walk1d needs walk1d.x or walk1d.x_list");
    }
    for (double x : xs) {
      if (!(x > 0.0 && x <= 0.5)) config.fail(config.has("walk1d.x_list") ? "walk1d.x_list" : "walk1d.x", "step scales must lie in (0, 0.5]");
    }
    const std::string est = config.get_string("walk1d.estimator", "naive");
    if (est != "naive" && est != "tilted" && est != "both") {
      config.fail("walk1d.estimator", "must be naive, tilted, or both");
    }
    if (!(config.get_double("walk1d.delta", 0.2) > -1.0)) {
      config.fail("walk1d.delta", "must be > -1");
    }
    const double w0 = config.get_double("walk1d.w0", 0.5);
    if (!(w0 > 0.0 && w0 < 1.0)) config.fail("walk1d.w0", "must lie in (0, 1)");
    if (config.get_int("walk1d.profile_grid", 512) < 16) {
      config.fail("walk1d.profile_grid", "must be >= 16");
    }
  } else if (config.kind == "urn") {
    if (!(config.get_double("urn.red0", 1.0) > 0.0)) config.fail("urn.red0", "must be > 0");
    if (!(config.get_double("urn.black0", 1.0) > 0.0)) config.fail("urn.black0", "must be > 0");
    const double x = config.get_double("urn.x", 0.0);
    if (!(x > 0.0 && x < 1.0)) config.fail("urn.x", "must lie in (0, 1)");
    if (config.get_int("urn.steps", 0) < 1) config.fail("urn.steps", "must be >= 1");
  } else if (config.kind == "network") {
    const long long N = config.get_int("network.N", 0);
    if (N < 4) config.fail("network.N", "needs at least 4 agents");
    std::vector<double> xs = config.get_double_list("network.x_list");
    if (xs.empty() && config.has("network.x")) xs.push_back(config.get_double("network.x", 0.0));
    if (xs.empty()) {
      throw ConfigError(config.source + ": network needs network.x or network.x_list");
    }
    for (double x : xs) {
      if (!(x > 0.0 && x < 1.0)) config.fail(config.has("network.x_list") ? "network.x_list" : "network.x", "discount rates must lie in (0, 1)");
    }
    if (config.get_int("network.max_steps", 0) < 1) config.fail("network.max_steps", "must be >= 1");
    if (!(config.get_double("network.threshold", 1e-4) > 0.0)) config.fail("network.threshold", "must be > 0");
    if (config.get_int("network.persistence", 0) < 1) config.fail("network.persistence", "must be >= 1");
    const std::string init = config.get_string("network.init", "stationary");
    if (init != "unit" && init != "stationary") config.fail("network.init", "must be unit or stationary");
    const std::string rule = config.get_string("network.rule", "product_all_pairs");
    if (rule != "product_all_pairs" && rule != "chooser_pairs_only") {
      config.fail("network.rule", "must be product_all_pairs or chooser_pairs_only");
    }
  } else if (config.kind == "meanfield") {
    const long long n = config.get_int("meanfield.n", 5);
    if (n < 4) config.fail("meanfield.n", "must be >= 4");
    const long long n_min = config.get_int("meanfield.n_min", 4);
    const long long n_max = config.get_int("meanfield.n_max", 40);
    if (n_min < 4) config.fail("meanfield.n_min", "must be >= 4");
    if (n_max < n_min) config.fail("meanfield.n_max", "must be >= meanfield.n_min");
  } else if (config.kind == "certificate") {
    const long long N = config.get_int("certificate.N", 0);
    if (N < 4 || N > 8) config.fail("certificate.N", "exact enumeration supports 4..8 agents");
    const double x = config.get_double("certificate.x", 0.0);
    if (!(x > 0.0 && x < 1.0)) config.fail("certificate.x", "must lie in (0, 1)");
    if (!(config.get_double("certificate.radius", 0.0) > 0.0)) config.fail("certificate.radius", "must be > 0");
    if (config.get_int("certificate.grid_resolution", 0) < 1) config.fail("certificate.grid_resolution", "must be >= 1");
    const std::string rule = config.get_string("certificate.rule", "product_all_pairs");
    if (rule != "product_all_pairs" && rule != "chooser_pairs_only") {
      config.fail("certificate.rule", "must be product_all_pairs or chooser_pairs_only");
    }
  }
}

std::string config_echo(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [key, value] : config.entries) {
    out += key + " = " + value + "\n";
  }
  return out;
}

}  // namespace trapsim
