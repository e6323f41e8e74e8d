#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "picres/diagnostics.hpp"
#include "picres/samplers.hpp"

namespace picres {

// Flat "key = value" text with dotted keys and '#' comments.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated list of n values, or one value broadcast to n.
  VectorXd get_vector(const std::string& key, int n, double fallback) const;

  // Rejects keys outside the known schema, naming the key and its line.
  void check_known_keys() const;
  // PICRES_<KEY> with '.' mapped to '_' overrides any known key.
  void apply_env(const std::string& prefix = "PICRES_");
  std::string echo() const;
  const std::string& origin() const { return origin_; }

 private:
  std::string where(const std::string& key) const;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  std::string origin_;
};

const std::vector<std::string>& known_config_keys();
std::string env_name(const std::string& key, const std::string& prefix = "PICRES_");

MixtureCopula parse_mixture(const std::string& families, const std::string& weights);
std::string format_mixture(const MixtureCopula& mix);

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> chains;
  std::optional<int> sweeps;
  std::optional<std::string> out;
};

void apply_overrides(Config& cfg, const CliOverrides& o);

struct RunConfig {
  ModelKind kind = ModelKind::I;
  std::string input;
  std::string output_dir;
  SamplerConfig sampler;
  bool diagnostics_enabled = true;
  bool fail_exit = true;
  DiagnosticsConfig diag;
  int reserve_bins = 50;
};

// Data-independent settings; relative paths resolve against the config file's directory.
RunConfig load_run_config(const Config& cfg);
// Model settings need the triangle for defaults that depend on J or the data.
ModelConfig load_model_config(const Config& cfg, const ClaimsTriangle& tri);

}  // namespace picres
