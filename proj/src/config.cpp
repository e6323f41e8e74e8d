#include "picres/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "picres/errors.hpp"

namespace picres {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::ConfigError, where + ": expected a number, got '" + s + "'");
  }
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "model", "data.input", "output.dir",
      "sampler.seed", "sampler.chains", "sampler.sweeps", "sampler.thin", "sampler.burnin_fraction",
      "sampler.init_jitter", "sampler.continue_adapting",
      "am.w1", "am.adapt_scale", "am.fixed_scale", "am.warmup", "am.iw_dof_offset",
      "prior.phi_mean", "prior.phi_var", "prior.psi_mean", "prior.psi_var", "prior.hyper_alpha",
      "prior.hyper_beta", "prior.scale_alpha", "prior.scale_beta", "prior.iw_scale", "prior.iw_dof_offset",
      "model.sigma", "model.tau", "model.sigma_diag", "model.sample_hyper", "model.sample_scales",
      "model.sample_covariance", "model.per_year",
      "copula.payment", "copula.incurred", "copula.weights_payment", "copula.weights_incurred",
      "copula.clayton_bounds", "copula.gumbel_bounds", "copula.frank_bounds",
      "diagnostics.enabled", "diagnostics.monitor", "diagnostics.fail_exit", "diagnostics.split_rhat",
      "diagnostics.rhat_max", "diagnostics.acf_max",
      "reserve.bins",
      "simulate.J", "simulate.output",
      "truth.phi", "truth.psi", "truth.sigma", "truth.tau", "truth.sigma_diag"};
  return keys;
}

std::string env_name(const std::string& key, const std::string& prefix) {
  std::string out = prefix;
  for (char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config c;
  c.origin_ = origin;
  std::stringstream ss(text);
  std::string line;
  int n = 0;
  while (std::getline(ss, line)) {
    ++n;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::ParseError, origin + ":" + std::to_string(n) + ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw Error(ErrorKind::ParseError, origin + ":" + std::to_string(n) + ": empty key");
    if (c.values_.count(key))
      throw Error(ErrorKind::ParseError, origin + ":" + std::to_string(n) + ": duplicate key '" + key + "'");
    c.values_[key] = trim(body.substr(eq + 1));
    c.lines_[key] = n;
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IOError, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::string Config::where(const std::string& key) const {
  const auto it = lines_.find(key);
  if (it == lines_.end()) return origin_ + ": " + key;
  return origin_ + ":" + std::to_string(it->second) + ": " + key;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? to_double(values_.at(key), where(key)) : fallback;
}

long Config::get_int(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  const double v = to_double(values_.at(key), where(key));
  if (v != std::floor(v)) throw Error(ErrorKind::ConfigError, where(key) + ": expected an integer");
  return static_cast<long>(v);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  std::string v = values_.at(key);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw Error(ErrorKind::ConfigError, where(key) + ": expected a boolean, got '" + values_.at(key) + "'");
}

VectorXd Config::get_vector(const std::string& key, int n, double fallback) const {
  if (!has(key)) return VectorXd::Constant(n, fallback);
  const auto parts = split(values_.at(key), ',');
  if (parts.size() == 1) return VectorXd::Constant(n, to_double(parts[0], where(key)));
  if (static_cast<int>(parts.size()) != n)
    throw Error(ErrorKind::ConfigError,
                where(key) + ": expected 1 or " + std::to_string(n) + " values, got " + std::to_string(parts.size()));
  VectorXd v(n);
  for (int k = 0; k < n; ++k) v(k) = to_double(parts[k], where(key));
  return v;
}

void Config::check_known_keys() const {
  const auto& known = known_config_keys();
  for (const auto& [key, value] : values_)
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw Error(ErrorKind::ConfigError, where(key) + ": unknown key");
}

void Config::apply_env(const std::string& prefix) {
  for (const auto& key : known_config_keys())
    if (const char* v = std::getenv(env_name(key, prefix).c_str())) {
      values_[key] = trim(v);
      lines_.erase(key);
    }
}

std::string Config::echo() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

MixtureCopula parse_mixture(const std::string& families, const std::string& weights) {
  const std::string f = trim(families);
  if (f.empty() || f == "independence") return independence_copula();
  const auto parts = split(f, ',');
  const auto ws = weights.empty() ? std::vector<std::string>{} : split(weights, ',');
  if (!ws.empty() && ws.size() != parts.size())
    throw Error(ErrorKind::ConfigError, "copula weights count does not match components");
  std::vector<std::pair<double, ArchimedeanParam>> comps;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto colon = parts[k].find(':');
    if (colon == std::string::npos)
      throw Error(ErrorKind::ConfigError, "copula component '" + parts[k] + "' must be family:rho");
    const Family fam = parse_family(trim(parts[k].substr(0, colon)));
    const double rho = to_double(trim(parts[k].substr(colon + 1)), "copula component '" + parts[k] + "'");
    comps.push_back({ws.empty() ? 1.0 : to_double(ws[k], "copula weight"), ArchimedeanParam{fam, rho}});
  }
  return MixtureCopula(std::move(comps));
}

std::string format_mixture(const MixtureCopula& mix) {
  std::string out;
  char buf[128];
  for (const auto& [w, p] : mix.components()) {
    std::snprintf(buf, sizeof buf, "%s%.6g*%s:%.6g", out.empty() ? "" : ",", w, family_name(p.family), p.rho);
    out += buf;
  }
  return out;
}

void apply_overrides(Config& cfg, const CliOverrides& o) {
  if (o.seed) cfg.set("sampler.seed", std::to_string(*o.seed));
  if (o.chains) cfg.set("sampler.chains", std::to_string(*o.chains));
  if (o.sweeps) cfg.set("sampler.sweeps", std::to_string(*o.sweeps));
  if (o.out) cfg.set("output.dir", *o.out);
}

namespace {

std::string resolve(const Config& cfg, const std::string& path) {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(cfg.origin()).parent_path() / p).lexically_normal().string();
}

}  // namespace

RunConfig load_run_config(const Config& cfg) {
  cfg.check_known_keys();
  RunConfig rc;
  rc.kind = parse_model(cfg.get("model", "I"));
  rc.input = resolve(cfg, cfg.get("data.input", ""));
  rc.output_dir = cfg.get("output.dir", "out");
  auto& s = rc.sampler;
  s.seed = static_cast<std::uint64_t>(cfg.get_int("sampler.seed", 1));
  s.chains = static_cast<int>(cfg.get_int("sampler.chains", 4));
  s.sweeps = static_cast<int>(cfg.get_int("sampler.sweeps", 2000));
  s.thin = static_cast<int>(cfg.get_int("sampler.thin", 1));
  s.burnin_fraction = cfg.get_double("sampler.burnin_fraction", 0.2);
  s.init_jitter = cfg.get_double("sampler.init_jitter", 0.0);
  s.am.continue_adapting = cfg.get_bool("sampler.continue_adapting", false);
  s.am.w1 = cfg.get_double("am.w1", s.am.w1);
  s.am.adapt_scale = cfg.get_double("am.adapt_scale", s.am.adapt_scale);
  s.am.fixed_scale = cfg.get_double("am.fixed_scale", s.am.fixed_scale);
  s.am.warmup = static_cast<int>(cfg.get_int("am.warmup", 0));
  s.am.iw_dof_offset = cfg.get_double("am.iw_dof_offset", s.am.iw_dof_offset);
  s.am.validate();
  if (s.chains < 1) throw Error(ErrorKind::ConfigError, "sampler.chains must be at least 1");
  if (s.sweeps < 1) throw Error(ErrorKind::ConfigError, "sampler.sweeps must be at least 1");
  if (s.thin < 1) throw Error(ErrorKind::ConfigError, "sampler.thin must be at least 1");
  if (!(s.burnin_fraction >= 0.0 && s.burnin_fraction < 1.0))
    throw Error(ErrorKind::ConfigError, "sampler.burnin_fraction must lie in [0,1)");
  rc.diagnostics_enabled = cfg.get_bool("diagnostics.enabled", true);
  rc.fail_exit = cfg.get_bool("diagnostics.fail_exit", true);
  rc.diag.split = cfg.get_bool("diagnostics.split_rhat", false);
  rc.diag.rhat_max = cfg.get_double("diagnostics.rhat_max", rc.diag.rhat_max);
  rc.diag.acf_max = cfg.get_double("diagnostics.acf_max", rc.diag.acf_max);
  if (cfg.has("diagnostics.monitor")) rc.diag.monitor = split(cfg.get("diagnostics.monitor", ""), ',');
  if (rc.diagnostics_enabled && s.chains < 2)
    throw Error(ErrorKind::ConfigError, "sampler.chains must be at least 2 when diagnostics.enabled is on");
  rc.reserve_bins = static_cast<int>(cfg.get_int("reserve.bins", 50));
  if (rc.reserve_bins < 1) throw Error(ErrorKind::ConfigError, "reserve.bins must be positive");
  return rc;
}

ModelConfig load_model_config(const Config& cfg, const ClaimsTriangle& tri) {
  const int J = tri.J();
  ModelConfig m;
  m.kind = parse_model(cfg.get("model", "I"));
  auto& h = m.hyper;
  h = HyperPriors::defaults(J);
  h.phi_mean = cfg.get_vector("prior.phi_mean", J + 1, 0.0);
  h.phi_var = cfg.get_vector("prior.phi_var", J + 1, 100.0);
  h.psi_mean = cfg.get_vector("prior.psi_mean", J, 0.0);
  h.psi_var = cfg.get_vector("prior.psi_var", J, 100.0);
  h.alpha_s = cfg.get_vector("prior.hyper_alpha", J + 1, 1.0);
  h.beta_s = cfg.get_vector("prior.hyper_beta", J + 1, 1.0);
  h.alpha_t = VectorXd::Constant(J, h.alpha_s(0));
  h.beta_t = VectorXd::Constant(J, h.beta_s(0));
  if (cfg.has("prior.hyper_alpha")) h.alpha_t = cfg.get_vector("prior.hyper_alpha", J + 1, 1.0).head(J);
  if (cfg.has("prior.hyper_beta")) h.beta_t = cfg.get_vector("prior.hyper_beta", J + 1, 1.0).head(J);
  h.scale_alpha = cfg.get_double("prior.scale_alpha", h.scale_alpha);
  h.scale_beta = cfg.get_double("prior.scale_beta", h.scale_beta);
  h.iw_scale = cfg.get_double("prior.iw_scale", h.iw_scale);
  h.iw_dof_offset = cfg.get_double("prior.iw_dof_offset", h.iw_dof_offset);
  auto bounds = [&](const std::string& key, double& lo, double& hi) {
    if (!cfg.has(key)) return;
    const VectorXd b = cfg.get_vector(key, 2, 0.0);
    if (!(b(0) < b(1))) throw Error(ErrorKind::ConfigError, key + ": lower bound must be below upper bound");
    lo = b(0);
    hi = b(1);
  };
  bounds("copula.clayton_bounds", h.copula.clayton_lo, h.copula.clayton_hi);
  bounds("copula.gumbel_bounds", h.copula.gumbel_lo, h.copula.gumbel_hi);
  bounds("copula.frank_bounds", h.copula.frank_lo, h.copula.frank_hi);
  h.validate(J);

  m.sample_hyper = cfg.get_bool("model.sample_hyper", true);
  m.sample_scales = cfg.get_bool("model.sample_scales", false);
  m.sample_covariance = cfg.get_bool("model.sample_covariance", true);
  m.init = make_factors(J, 0.0, 0.0, 1.0, 1.0);
  m.init.sigma = cfg.get_vector("model.sigma", J + 1, 0.1);
  m.init.tau = cfg.get_vector("model.tau", J, 0.1);
  m.init.validate();
  const VectorXd s2 = m.init.sigma.array().square();
  const VectorXd t2 = m.init.tau.array().square();
  VectorXd both(2 * J + 1);
  both << s2, t2;
  switch (m.kind) {
    case ModelKind::I: m.dep = ModelISpec{}; break;
    case ModelKind::II: {
      ModelIISpec spec;
      spec.Sigma = both.asDiagonal();
      if (cfg.get_bool("model.per_year", false)) spec.per_year.assign(J + 1, spec.Sigma);
      m.dep = spec;
      break;
    }
    case ModelKind::III: m.dep = ModelIIISpec{TelescopingBlockDiag::diagonal(s2, t2)}; break;
    case ModelKind::IV: {
      ModelIVSpec spec;
      spec.mix_P = parse_mixture(cfg.get("copula.payment", ""), cfg.get("copula.weights_payment", ""));
      spec.mix_I = parse_mixture(cfg.get("copula.incurred", ""), cfg.get("copula.weights_incurred", ""));
      if (cfg.has("model.sigma_diag")) {
        spec.Sigma_diag = cfg.get_vector("model.sigma_diag", 2 * J + 1, 1.0);
      } else {
        // Spread of each observed log-level column, floored for short columns.
        const MatrixXd X = observed_levels(tri);
        spec.Sigma_diag.resize(2 * J + 1);
        for (int c = 0; c <= 2 * J; ++c) {
          std::vector<double> v;
          for (int i = 0; i <= J; ++i)
            if (level_observed(J, i, c)) v.push_back(X(i, c));
          double var = 0.0;
          if (v.size() >= 2) {
            double mean = 0.0;
            for (double x : v) mean += x;
            mean /= v.size();
            for (double x : v) var += (x - mean) * (x - mean);
            var /= v.size() - 1.0;
          }
          spec.Sigma_diag(c) = std::max(var, 0.01);
        }
      }
      if (!(spec.Sigma_diag.array() > 0.0).all())
        throw Error(ErrorKind::ConfigError, "model.sigma_diag must be positive");
      m.dep = spec;
      break;
    }
  }
  return m;
}

}  // namespace picres
