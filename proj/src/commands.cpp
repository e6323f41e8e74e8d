#include "picres/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <regex>

#include <Eigen/Core>
#include <boost/math/distributions/normal.hpp>

#include "picres/errors.hpp"
#include "picres/io.hpp"
#include "picres/reserving.hpp"

namespace fs = std::filesystem;

namespace picres {

namespace {

constexpr const char* kVersion = "0.1.0";

double normal_quantile(double u) { return boost::math::quantile(boost::math::normal(), u); }

VectorXd sample_block(const MixtureCopula& mix, int d, Rng& rng) {
  if (d == 1) return VectorXd::Constant(1, uniform01(rng));
  return copula_sample_one(mix, d, rng);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string rate_line(const char* key, const AcceptanceRate& r) {
  return std::string("run.acceptance.") + key + " = " + fmt(r.rate()) + " (" + std::to_string(r.accepted) + "/" +
         std::to_string(r.proposed) + ")\n";
}

Config load_config(const std::string& path, const CliOverrides& o) {
  Config cfg = Config::load(path);
  cfg.apply_env();
  apply_overrides(cfg, o);
  return cfg;
}

std::vector<fs::path> trace_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::MissingTrace, "no trace directory '" + dir.string() + "'");
  const std::regex re("trace_chain([0-9]+)\\.csv");
  std::vector<std::pair<int, fs::path>> found;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = e.path().filename().string();
    if (std::regex_match(name, m, re)) found.push_back({std::stoi(m[1]), e.path()});
  }
  std::sort(found.begin(), found.end());
  std::vector<fs::path> out;
  for (auto& [k, p] : found) out.push_back(p);
  if (out.empty()) throw Error(ErrorKind::MissingTrace, "no trace_chain*.csv files in '" + dir.string() + "'");
  return out;
}

TraceMatrix load_traces(const fs::path& dir) {
  std::vector<std::string> names;
  std::vector<std::vector<std::vector<double>>> chains;
  for (const auto& p : trace_files(dir)) {
    TraceFile t = read_trace_csv(p.string());
    if (chains.empty())
      names = t.names;
    else if (t.names != names)
      throw Error(ErrorKind::ParseError, p.string() + ": header differs from the first chain");
    chains.push_back(std::move(t.rows));
  }
  return make_trace_matrix(names, chains);
}

std::string diagnose_traces(const TraceMatrix& traces, double burnin, const DiagnosticsConfig& dc, bool& pass) {
  if (traces.n_chains() < 2) throw Error(ErrorKind::InsufficientChains, "diagnostics need at least two chains");
  const TraceMatrix kept = burnin_discard(traces, burnin);
  const auto rows = diagnostics_report(kept, dc);
  pass = all_pass(rows);
  return diagnostics_csv(rows);
}

}  // namespace

DevelopmentFactors truth_factors(const Config& cfg, int J) {
  DevelopmentFactors t = make_factors(J, 0.0, 0.0, 0.1, 0.05);
  VectorXd phi(J + 1), psi(J);
  phi(0) = 7.0;
  for (int j = 1; j <= J; ++j) phi(j) = 0.6 * std::pow(0.5, j - 1);
  for (int j = 0; j < J; ++j) psi(j) = 0.1 * std::pow(0.5, j);
  t.phi = cfg.has("truth.phi") ? cfg.get_vector("truth.phi", J + 1, 0.0) : phi;
  t.psi = cfg.has("truth.psi") ? cfg.get_vector("truth.psi", J, 0.0) : psi;
  t.sigma = cfg.get_vector("truth.sigma", J + 1, 0.1);
  t.tau = cfg.get_vector("truth.tau", J, 0.05);
  return t;
}

ClaimsTriangle simulate_triangle(const ModelConfig& m, const DevelopmentFactors& truth, Rng& rng) {
  const int J = truth.J();
  MatrixXd P = MatrixXd::Zero(J + 1, J + 1), I = MatrixXd::Zero(J + 1, J + 1);
  if (m.kind == ModelKind::IV) {
    const auto& spec = std::get<ModelIVSpec>(m.dep);
    const VectorXd beta = truth.beta();
    for (int i = 0; i <= J; ++i) {
      const VectorXd up = sample_block(spec.mix_P, J + 1, rng);
      for (int c = 0; c <= J; ++c) P(i, c) = std::exp(beta(c) + std::sqrt(spec.Sigma_diag(c)) * normal_quantile(up(c)));
      if (J >= 1) {
        const VectorXd ui = sample_block(spec.mix_I, J, rng);
        for (int j = 0; j < J; ++j) {
          const int c = J + 1 + j;
          I(i, j) = std::exp(beta(c) + std::sqrt(spec.Sigma_diag(c)) * normal_quantile(ui(j)));
        }
      }
      I(i, J) = P(i, J);
    }
    return make_triangle(P, I);
  }
  const int dim = 2 * J + 1;
  VectorXd mu((J + 1) * dim);
  for (int i = 0; i <= J; ++i) mu.segment(i * dim, dim) = truth.beta();
  const VectorXd xi = mvn_sample_psd(mu, ratio_covariance_full(J, m.dep, truth), rng);
  for (int i = 0; i <= J; ++i) {
    double lp = 0.0;
    for (int j = 0; j <= J; ++j) {
      lp += xi(i * dim + j);
      P(i, j) = std::exp(lp);
    }
    double li = lp;
    I(i, J) = P(i, J);
    for (int j = J - 1; j >= 0; --j) {
      li -= xi(i * dim + J + 1 + j);
      I(i, j) = std::exp(li);
    }
  }
  return make_triangle(P, I);
}

int cmd_simulate(const std::string& config_path, const CliOverrides& o) {
  const Config cfg = load_config(config_path, o);
  cfg.check_known_keys();
  const int J = static_cast<int>(cfg.get_int("simulate.J", 3));
  if (J < 1) throw Error(ErrorKind::ConfigError, "simulate.J must be at least 1");
  const DevelopmentFactors truth = truth_factors(cfg, J);
  // Model settings are built against a placeholder triangle of the right size.
  const ClaimsTriangle shape = make_triangle(MatrixXd::Ones(J + 1, J + 1), MatrixXd::Ones(J + 1, J + 1));
  Config mcfg = cfg;
  mcfg.set("model.sigma", cfg.get("truth.sigma", "0.1"));
  mcfg.set("model.tau", cfg.get("truth.tau", "0.05"));
  if (cfg.has("truth.sigma_diag")) mcfg.set("model.sigma_diag", cfg.get("truth.sigma_diag", ""));
  ModelConfig m = load_model_config(mcfg, shape);
  if (auto* spec = std::get_if<ModelIVSpec>(&m.dep); spec && !cfg.has("truth.sigma_diag"))
    spec->Sigma_diag = VectorXd::Constant(2 * J + 1, 0.01);
  Rng rng = make_rng(static_cast<std::uint64_t>(cfg.get_int("sampler.seed", 1)), 0);
  const ClaimsTriangle tri = simulate_triangle(m, truth, rng);
  fs::path out = o.out ? fs::path(*o.out) / "triangle.csv" : fs::path(cfg.get("simulate.output", "triangle.csv"));
  if (!o.out && out.is_relative()) out = (fs::path(cfg.origin()).parent_path() / out).lexically_normal();
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_text(out.string(), triangle_csv(tri));
  std::string truth_txt = "model = " + std::string(model_name(m.kind)) + "\nsimulate.J = " + std::to_string(J) + "\n";
  auto vec = [](const VectorXd& v) {
    std::string s;
    for (Eigen::Index k = 0; k < v.size(); ++k) s += (k ? "," : "") + fmt(v(k));
    return s;
  };
  truth_txt += "truth.phi = " + vec(truth.phi) + "\ntruth.psi = " + vec(truth.psi) + "\ntruth.sigma = " +
               vec(truth.sigma) + "\ntruth.tau = " + vec(truth.tau) + "\n";
  if (const auto* spec = std::get_if<ModelIVSpec>(&m.dep))
    truth_txt += "truth.sigma_diag = " + vec(spec->Sigma_diag) + "\ncopula.payment = " + format_mixture(spec->mix_P) +
                 "\ncopula.incurred = " + format_mixture(spec->mix_I) + "\n";
  write_text((out.parent_path() / (out.stem().string() + ".truth.txt")).string(), truth_txt);
  std::cerr << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const CliOverrides& o) {
  const Config cfg = load_config(config_path, o);
  const RunConfig rc = load_run_config(cfg);
  if (rc.input.empty()) throw Error(ErrorKind::ConfigError, "data.input is required");
  if (!fs::exists(rc.input)) throw Error(ErrorKind::IOError, "data.input: file '" + rc.input + "' does not exist");
  const ClaimsTriangle tri = read_triangle_csv(rc.input);
  const ModelConfig model = load_model_config(cfg, tri);
  const SamplerContext ctx(tri, model, rc.sampler.am);
  const auto started = std::chrono::steady_clock::now();
  const auto chains = run_chains(ctx, rc.sampler);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const fs::path out(rc.output_dir);
  fs::create_directories(out);
  for (std::size_t k = 0; k < chains.size(); ++k)
    write_text((out / ("trace_chain" + std::to_string(k) + ".csv")).string(), trace_csv(chains[k].names, chains[k].rows));

  // Everything downstream reads the traces back so `diagnose` reproduces it exactly.
  const TraceMatrix traces = load_traces(out);
  bool pass = true;
  if (rc.diagnostics_enabled)
    write_text((out / "diagnostics.csv").string(), diagnose_traces(traces, rc.sampler.burnin_fraction, rc.diag, pass));

  const TraceMatrix kept = burnin_discard(traces, rc.sampler.burnin_fraction);
  std::vector<ChainState> draws;
  for (int c = 0; c < kept.n_chains(); ++c)
    for (Eigen::Index r = 0; r < kept.chains[c].rows(); ++r) {
      const VectorXd row = kept.chains[c].row(r);
      draws.push_back(state_from_trace(ctx, chains[c].final_state, kept.names,
                                       std::vector<double>(row.data(), row.data() + row.size())));
    }
  if (draws.empty()) throw Error(ErrorKind::TooShort, "no retained draws after burn-in");
  const MatrixXd ult = predictive_ultimate(ctx, draws, stream_seed(rc.sampler.seed, 0x5eed));
  const ReserveSummary res = reserve_distribution(ult, tri);
  write_text((out / "reserves.csv").string(), reserve_csv(res));
  write_text((out / "reserve_histogram.csv").string(), histogram_csv(histogram(res.total_samples, rc.reserve_bins)));

  std::vector<std::vector<MatrixXd>> cov_draws;
  if ((model.kind == ModelKind::II || model.kind == ModelKind::III) && model.sample_covariance) {
    for (const auto& d : draws) {
      std::vector<MatrixXd> blocks;
      if (const auto* m2 = std::get_if<ModelIISpec>(&d.params.dep))
        blocks = m2->per_year.empty() ? std::vector<MatrixXd>{m2->Sigma} : m2->per_year;
      else
        blocks = std::get<ModelIIISpec>(d.params.dep).tele.blocks();
      cov_draws.resize(blocks.size());
      for (std::size_t b = 0; b < blocks.size(); ++b) cov_draws[b].push_back(blocks[b]);
    }
  }
  write_text((out / "eigen_summary.csv").string(), eigen_csv(posterior_cov_eigen_summary(cov_draws)));

  AcceptanceRate aux, cop, cov, scale, dev;
  for (const auto& c : chains) {
    for (auto [dst, src] : {std::pair{&aux, &c.adapt.aux_rate}, {&cop, &c.adapt.copula_rate},
                            {&cov, &c.adapt.cov_rate}, {&scale, &c.adapt.scale_rate}, {&dev, &c.adapt.dev_rate}}) {
      dst->proposed += src->proposed;
      dst->accepted += src->accepted;
    }
  }
  const std::time_t now = std::time(nullptr);
  char stamp[64];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  std::string manifest = "# picres run manifest\n" + cfg.echo();
  manifest += "run.model = " + std::string(model_name(model.kind)) + "\n";
  manifest += "run.seed = " + std::to_string(rc.sampler.seed) + "\n";
  manifest += "run.chains = " + std::to_string(rc.sampler.chains) + "\n";
  manifest += "run.sweeps = " + std::to_string(rc.sampler.sweeps) + "\n";
  manifest += "run.burnin_fraction = " + fmt(rc.sampler.burnin_fraction) + "\n";
  manifest += "run.diagnostics_pass = " + std::string(pass ? "true" : "false") + "\n";
  manifest += rate_line("dev", dev) + rate_line("scale", scale) + rate_line("aux", aux) + rate_line("copula", cop) +
              rate_line("covariance", cov);
  manifest += "run.version = " + std::string(kVersion) + "\n";
  manifest += "run.eigen_version = " + std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
              "." + std::to_string(EIGEN_MINOR_VERSION) + "\n";
  manifest += "run.compiler = " + std::string(__VERSION__) + "\n";
  manifest += "run.seconds = " + fmt(seconds) + "\n";
  manifest += "run.timestamp = " + std::string(stamp) + "\n";
  write_text((out / "manifest.txt").string(), manifest);

  if (cov.proposed > 0 && (cov.rate() < 0.05 || cov.rate() > 0.8))
    std::cerr << "warning: covariance acceptance rate " << cov.rate() << " outside (0.05, 0.8)\n";
  std::cerr << "wrote " << out.string() << " (" << draws.size() << " retained draws)\n";
  if (rc.diagnostics_enabled && !pass) {
    std::cerr << (rc.fail_exit ? "error" : "warning") << ": diagnostics thresholds not met\n";
    if (rc.fail_exit) return 2;
  }
  return 0;
}

int cmd_diagnose(const std::string& trace_dir, const CliOverrides& o) {
  const fs::path dir(trace_dir);
  double burnin = 0.2;
  DiagnosticsConfig dc;
  bool fail_exit = true;
  if (fs::exists(dir / "manifest.txt")) {
    const Config m = Config::parse(read_text((dir / "manifest.txt").string()), (dir / "manifest.txt").string());
    burnin = m.get_double("sampler.burnin_fraction", burnin);
    dc.split = m.get_bool("diagnostics.split_rhat", false);
    dc.rhat_max = m.get_double("diagnostics.rhat_max", dc.rhat_max);
    dc.acf_max = m.get_double("diagnostics.acf_max", dc.acf_max);
    fail_exit = m.get_bool("diagnostics.fail_exit", true);
    if (m.has("diagnostics.monitor")) {
      dc.monitor.clear();
      std::string s = m.get("diagnostics.monitor", "");
      std::size_t start = 0;
      while (start <= s.size()) {
        const auto comma = s.find(',', start);
        std::string item = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        item.erase(0, item.find_first_not_of(' '));
        item.erase(item.find_last_not_of(' ') + 1);
        if (!item.empty()) dc.monitor.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    }
  }
  const TraceMatrix traces = load_traces(dir);
  bool pass = true;
  const std::string csv = diagnose_traces(traces, burnin, dc, pass);
  const fs::path target = o.out ? fs::path(*o.out) : dir;
  fs::create_directories(target);
  write_text((target / "diagnostics.csv").string(), csv);
  std::cout << csv;
  return pass || !fail_exit ? 0 : 2;
}

}  // namespace picres
