#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace trapsim {

// Flat, line-oriented key = value configuration with [section] headers.
// Keys are stored flattened as "section.key". No nesting.
struct ExperimentConfig {
  std::string kind;  // rate | walk1d | urn | network | meanfield | certificate
  std::map<std::string, std::string> entries;   // flattened key -> value
  std::map<std::string, int> entry_lines;       // flattened key -> source line
  std::string source;                            // file name or preset tag
  std::string preset_name;                       // nonempty when built by preset()
  std::uint64_t master_seed = 0;
  bool seed_set = false;
  long long n_runs = 1;
  std::string out_dir;

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;

  // ConfigError carrying "<source>:<line>" when the key exists but is junk.
  [[noreturn]] void fail(const std::string& key, const std::string& why) const;
};

ExperimentConfig parse_config_text(const std::string& text, const std::string& source);
ExperimentConfig parse_config_file(const std::string& path);

// Canned experiment configurations used by the acceptance suite. Unknown
// names raise ConfigError whose message lists every available preset.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

// Structural validation: known kind, known keys for that kind, master_seed
// present, parameter domains. Throws ConfigError with line references.
void validate(const ExperimentConfig& config);

// Canonical sorted key = value rendering (used by manifests and --dry-run).
std::string config_echo(const ExperimentConfig& config);

}  // namespace trapsim
