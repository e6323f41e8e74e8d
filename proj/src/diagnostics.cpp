#include "picres/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "picres/errors.hpp"

namespace picres {

int TraceMatrix::index(const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == name) return static_cast<int>(k);
  throw Error(ErrorKind::MissingTrace, "no trace column '" + name + "'");
}

VectorXd TraceMatrix::column(int chain, const std::string& name) const { return chains.at(chain).col(index(name)); }

void TraceMatrix::validate() const {
  for (const auto& c : chains) {
    if (c.rows() != chains[0].rows()) throw Error(ErrorKind::LengthMismatch, "chains have different lengths");
    if (c.cols() != static_cast<Eigen::Index>(names.size()))
      throw Error(ErrorKind::LengthMismatch, "chain width does not match names");
  }
}

TraceMatrix make_trace_matrix(const std::vector<std::string>& names,
                              const std::vector<std::vector<std::vector<double>>>& chains) {
  TraceMatrix t;
  t.names = names;
  for (const auto& rows : chains) {
    MatrixXd m(rows.size(), names.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != names.size()) throw Error(ErrorKind::LengthMismatch, "trace row width");
      for (std::size_t c = 0; c < names.size(); ++c) m(r, c) = rows[r][c];
    }
    t.chains.push_back(std::move(m));
  }
  t.validate();
  return t;
}

namespace {

std::vector<VectorXd> chain_columns(const TraceMatrix& t, const std::string& name, bool split) {
  std::vector<VectorXd> out;
  const int k = t.index(name);
  for (const auto& c : t.chains) {
    const VectorXd x = c.col(k);
    if (!split) {
      out.push_back(x);
      continue;
    }
    const Eigen::Index h = x.size() / 2;
    out.push_back(x.head(h));
    out.push_back(x.segment(x.size() - h, h));
  }
  return out;
}

double variance(const VectorXd& x) {
  const double m = x.mean();
  return (x.array() - m).square().sum() / static_cast<double>(x.size() - 1);
}

double autocov(const VectorXd& x, double mean, int lag) {
  const Eigen::Index n = x.size();
  double s = 0.0;
  for (Eigen::Index t = 0; t + lag < n; ++t) s += (x(t) - mean) * (x(t + lag) - mean);
  return s / static_cast<double>(n);
}

}  // namespace

double gelman_rubin(const TraceMatrix& traces, const std::string& name, bool split) {
  traces.validate();
  if (traces.n_chains() < 2) throw Error(ErrorKind::InsufficientChains, "R-hat needs at least two chains");
  if (traces.n_sweeps() < 10) throw Error(ErrorKind::TooShort, "R-hat needs at least ten sweeps");
  const auto cols = chain_columns(traces, name, split);
  const int m = static_cast<int>(cols.size());
  const double n = static_cast<double>(cols[0].size());
  VectorXd means(m);
  double W = 0.0;
  for (int c = 0; c < m; ++c) {
    means(c) = cols[c].mean();
    W += variance(cols[c]);
  }
  W /= m;
  const double B_over_n = variance(means);
  if (W == 0.0) return B_over_n == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double V = (n - 1.0) / n * W + B_over_n;
  return std::sqrt(V / W);
}

VectorXd acf(const VectorXd& trace, int max_lag) {
  if (max_lag < 0 || trace.size() <= max_lag) throw Error(ErrorKind::TooShort, "trace shorter than max_lag + 1");
  const double mean = trace.mean();
  const double c0 = autocov(trace, mean, 0);
  VectorXd out = VectorXd::Zero(max_lag + 1);
  out(0) = 1.0;
  if (c0 == 0.0) return out;
  for (int k = 1; k <= max_lag; ++k) out(k) = autocov(trace, mean, k) / c0;
  return out;
}

double effective_sample_size(const TraceMatrix& traces, const std::string& name) {
  traces.validate();
  const auto cols = chain_columns(traces, name, false);
  const int m = static_cast<int>(cols.size());
  const int n = static_cast<int>(cols[0].size());
  if (n < 4) throw Error(ErrorKind::TooShort, "ESS needs at least four sweeps");
  VectorXd means(m);
  double W = 0.0;
  for (int c = 0; c < m; ++c) {
    means(c) = cols[c].mean();
    W += variance(cols[c]);
  }
  W /= m;
  const double V = (n - 1.0) / n * W + (m > 1 ? variance(means) : 0.0);
  if (V == 0.0) return static_cast<double>(m) * n;
  auto rho = [&](int lag) {
    double ac = 0.0;
    for (int c = 0; c < m; ++c) ac += autocov(cols[c], means(c), lag);
    ac /= m;
    return 1.0 - (W - ac) / V;
  };
  double tau = -1.0;
  for (int k = 0; 2 * k + 1 < n; ++k) {
    const double pair = rho(2 * k) + rho(2 * k + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return static_cast<double>(m) * n / std::max(tau, 1.0 / (static_cast<double>(m) * n));
}

TraceMatrix burnin_discard(const TraceMatrix& traces, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw Error(ErrorKind::ConfigError, "burn-in fraction must lie in [0,1)");
  TraceMatrix out;
  out.names = traces.names;
  for (const auto& c : traces.chains) {
    const Eigen::Index drop = static_cast<Eigen::Index>(std::floor(fraction * static_cast<double>(c.rows())));
    out.chains.push_back(c.bottomRows(c.rows() - drop));
  }
  return out;
}

std::vector<DiagnosticRow> diagnostics_report(const TraceMatrix& traces, const DiagnosticsConfig& cfg) {
  std::vector<DiagnosticRow> rows;
  for (const auto& name : traces.names) {
    bool monitored = false;
    for (const auto& p : cfg.monitor) monitored |= name.rfind(p, 0) == 0;
    if (!monitored) continue;
    DiagnosticRow r;
    r.name = name;
    r.rhat = gelman_rubin(traces, name, cfg.split);
    // Chains too short for the lag cannot pass.
    double a = std::numeric_limits<double>::quiet_NaN();
    if (traces.n_sweeps() > cfg.acf_lag) {
      a = 0.0;
      for (int c = 0; c < traces.n_chains(); ++c) a += acf(traces.column(c, name), cfg.acf_lag)(cfg.acf_lag);
      a /= traces.n_chains();
    }
    r.acf_lag = a;
    r.ess = effective_sample_size(traces, name);
    r.pass = r.rhat < cfg.rhat_max && std::abs(r.acf_lag) < cfg.acf_max;
    rows.push_back(r);
  }
  return rows;
}

bool all_pass(const std::vector<DiagnosticRow>& rows) {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

std::string diagnostics_csv(const std::vector<DiagnosticRow>& rows) {
  std::string out = "name,rhat,acf_lag20,ess,pass\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g,%d\n", r.name.c_str(), r.rhat, r.acf_lag, r.ess, r.pass ? 1 : 0);
    out += buf;
  }
  return out;
}

}  // namespace picres
