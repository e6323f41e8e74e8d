#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "picres/commands.hpp"
#include "picres/errors.hpp"
#include "picres/io.hpp"

using namespace picres;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("picres_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string smoke_config() { return (fs::current_path() / "configs" / "smoke.cfg").string(); }

ErrorKind error_of(const std::function<void()>& f, std::string* msg = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (msg) *msg = e.what();
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::IOError;
}

int run_binary(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(PICRES_BIN) + " " + args + " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("smoke run writes every artifact and is deterministic") {
  const fs::path a = scratch("smoke_a"), b = scratch("smoke_b");
  CliOverrides oa, ob;
  oa.out = a.string();
  ob.out = b.string();
  CHECK(cmd_run(smoke_config(), oa) == 0);
  for (const char* f : {"trace_chain0.csv", "trace_chain3.csv", "diagnostics.csv", "reserves.csv",
                        "reserve_histogram.csv", "eigen_summary.csv", "manifest.txt"})
    CHECK(fs::exists(a / f));
  CHECK(cmd_run(smoke_config(), ob) == 0);
  for (int c = 0; c < 4; ++c) {
    const std::string f = "trace_chain" + std::to_string(c) + ".csv";
    CHECK(read_text((a / f).string()) == read_text((b / f).string()));
  }
  CHECK(read_text((a / "reserves.csv").string()) == read_text((b / "reserves.csv").string()));

  // diagnose reproduces the in-line diagnostics byte for byte.
  const std::string inline_diag = read_text((a / "diagnostics.csv").string());
  const fs::path d = scratch("smoke_diag");
  CliOverrides od;
  od.out = d.string();
  CHECK(cmd_diagnose(a.string(), od) == 0);
  CHECK(read_text((d / "diagnostics.csv").string()) == inline_diag);

  // A different seed changes the traces.
  const fs::path s = scratch("smoke_seed");
  CliOverrides os;
  os.out = s.string();
  os.seed = 99;
  os.sweeps = 300;
  cmd_run(smoke_config(), os);
  CHECK(read_text((s / "trace_chain0.csv").string()) != read_text((a / "trace_chain0.csv").string()));
}

TEST_CASE("single chain with diagnostics is rejected") {
  const fs::path o = scratch("one_chain");
  CliOverrides ov;
  ov.out = o.string();
  ov.chains = 1;
  std::string msg;
  CHECK(error_of([&] { cmd_run(smoke_config(), ov); }, &msg) == ErrorKind::ConfigError);
  CHECK(msg.find("sampler.chains") != std::string::npos);
  CHECK(run_binary("run " + smoke_config() + " --chains 1 --out " + o.string(), o / "log.txt") == 1);
  CHECK(read_text((o / "log.txt").string()).find("sampler.chains") != std::string::npos);
}

TEST_CASE("diagnose errors") {
  const fs::path empty = scratch("diag_empty");
  CHECK(error_of([&] { cmd_diagnose(empty.string()); }) == ErrorKind::MissingTrace);
  CHECK(error_of([&] { cmd_diagnose((empty / "nope").string()); }) == ErrorKind::MissingTrace);

  const fs::path one = scratch("diag_one");
  std::vector<std::vector<double>> rows;
  for (int t = 0; t < 50; ++t) rows.push_back({0.01 * t, 1.0});
  write_text((one / "trace_chain0.csv").string(), trace_csv({"phi_0", "psi_0"}, rows));
  CHECK(error_of([&] { cmd_diagnose(one.string()); }) == ErrorKind::InsufficientChains);

  const fs::path cut = scratch("diag_cut");
  const std::string full = trace_csv({"phi_0", "psi_0"}, rows);
  write_text((cut / "trace_chain0.csv").string(), full);
  write_text((cut / "trace_chain1.csv").string(), full.substr(0, full.size() - 6));
  std::string msg;
  CHECK(error_of([&] { cmd_diagnose(cut.string()); }, &msg) == ErrorKind::ParseError);
  CHECK(msg.find("row 51") != std::string::npos);
}

TEST_CASE("configuration errors carry context") {
  const fs::path d = scratch("cfg");
  write_text((d / "bad.cfg").string(), "model = I\nsampler.sweps = 10\n");
  std::string msg;
  CHECK(error_of([&] { cmd_run((d / "bad.cfg").string()); }, &msg) == ErrorKind::ConfigError);
  CHECK(msg.find("bad.cfg:2") != std::string::npos);
  CHECK(msg.find("sampler.sweps") != std::string::npos);

  write_text((d / "syntax.cfg").string(), "model = I\nthis line has no equals\n");
  CHECK(error_of([&] { cmd_run((d / "syntax.cfg").string()); }, &msg) == ErrorKind::ParseError);
  CHECK(msg.find("syntax.cfg:2") != std::string::npos);

  write_text((d / "tri.csv").string(), "accident,development,source,value\n0,0,P,1\n0,0,I,abc\n");
  CHECK(error_of([&] { read_triangle_csv((d / "tri.csv").string()); }, &msg) == ErrorKind::ParseError);
  CHECK(msg.find("row 3") != std::string::npos);
}

TEST_CASE("environment overrides config keys") {
  const fs::path o = scratch("env");
  setenv("PICRES_SAMPLER_SWEEPS", "120", 1);
  CliOverrides ov;
  ov.out = o.string();
  cmd_run(smoke_config(), ov);
  unsetenv("PICRES_SAMPLER_SWEEPS");
  CHECK(read_trace_csv((o / "trace_chain0.csv").string()).rows.size() == 120);
  CHECK(read_text((o / "manifest.txt").string()).find("sampler.sweeps = 120") != std::string::npos);
}

TEST_CASE("simulate") {
  const fs::path d = scratch("sim");
  write_text((d / "quiet.cfg").string(),
             "model = I\nsimulate.J = 4\nsimulate.output = quiet.csv\nsampler.seed = 3\n"
             "truth.phi = 7,0.5,0.25,0.1,0.05\ntruth.psi = 0.1,0.05,0.02,0.01\n"
             "truth.sigma = 1e-200\ntruth.tau = 1e-200\n");
  CHECK(cmd_simulate((d / "quiet.cfg").string()) == 0);
  const ClaimsTriangle tri = read_triangle_csv((d / "quiet.csv").string());
  const double phi[5] = {7, 0.5, 0.25, 0.1, 0.05}, psi[4] = {0.1, 0.05, 0.02, 0.01};
  for (int i = 0; i <= 4; ++i) {
    double lp = 0.0;
    for (int j = 0; j <= 4 - i; ++j) {
      lp += phi[j];
      CHECK(tri.P(i, j) == std::exp(lp));
    }
  }
  // Incurred runs backward from the ultimate.
  double lu = 0.0;
  for (double p : phi) lu += p;
  CHECK(tri.I(0, 3) == doctest::Approx(std::exp(lu - psi[3])).epsilon(1e-14));
  CHECK(fs::exists(d / "quiet.truth.txt"));

  write_text((d / "noisy.cfg").string(), "model = II\nsimulate.J = 5\nsimulate.output = noisy.csv\n");
  CHECK(cmd_simulate((d / "noisy.cfg").string()) == 0);
  CHECK_NOTHROW(read_triangle_csv((d / "noisy.csv").string()));
}

TEST_CASE("Model IV simulation has heavier lower tails than a Gaussian copula") {
  Config cfg = Config::parse("model = IV\ncopula.payment = clayton:5\ncopula.incurred = independence\n", "inline");
  const ClaimsTriangle shape = make_triangle(MatrixXd::Ones(2, 2), MatrixXd::Ones(2, 2));
  ModelConfig m = load_model_config(cfg, shape);
  std::get<ModelIVSpec>(m.dep).Sigma_diag = VectorXd::Constant(3, 0.01);
  const DevelopmentFactors truth = make_factors(1, 1.0, 0.1, 0.1, 0.1);
  Rng rng = make_rng(81, 0);
  const int n = 40000;
  std::vector<double> a(n), b(n);
  for (int k = 0; k < n; ++k) {
    const ClaimsTriangle t = simulate_triangle(m, truth, rng);
    a[k] = t.P(0, 0);
    b[k] = t.P(0, 1);
  }
  const double q = 0.02;
  auto cut = [&](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[static_cast<std::size_t>(q * n)];
  };
  const double ca = cut(a), cb = cut(b);
  int both = 0, first = 0;
  for (int k = 0; k < n; ++k) {
    first += a[k] < ca;
    both += a[k] < ca && b[k] < cb;
  }
  // Gaussian copula with the same Kendall tau (5/7).
  const double r = std::sin(M_PI / 2 * 5.0 / 7.0);
  const double zq = -2.0537489106318225;  // normal 2% quantile
  int gb = 0, gf = 0;
  for (int k = 0; k < 400000; ++k) {
    const double z1 = std_normal(rng), z2 = r * z1 + std::sqrt(1 - r * r) * std_normal(rng);
    gf += z1 < zq;
    gb += z1 < zq && z2 < zq;
  }
  CHECK(static_cast<double>(both) / first > static_cast<double>(gb) / gf + 0.05);
}

TEST_CASE("binary usage errors") {
  const fs::path d = scratch("bin");
  CHECK(run_binary("", d / "log.txt") != 0);
  CHECK(run_binary("run " + (d / "missing.cfg").string(), d / "log.txt") == 1);
  CHECK(read_text((d / "log.txt").string()).rfind("error:", 0) == 0);
}
