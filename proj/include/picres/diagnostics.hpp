#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace picres {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct TraceMatrix {
  std::vector<std::string> names;
  std::vector<MatrixXd> chains;  // each n_sweeps x names.size()

  int n_chains() const { return static_cast<int>(chains.size()); }
  int n_sweeps() const { return chains.empty() ? 0 : static_cast<int>(chains[0].rows()); }
  int index(const std::string& name) const;
  VectorXd column(int chain, const std::string& name) const;
  void validate() const;
};

TraceMatrix make_trace_matrix(const std::vector<std::string>& names,
                              const std::vector<std::vector<std::vector<double>>>& chains);

double gelman_rubin(const TraceMatrix& traces, const std::string& name, bool split = false);
VectorXd acf(const VectorXd& trace, int max_lag);
// Multi-chain effective sample size (initial positive sequence).
double effective_sample_size(const TraceMatrix& traces, const std::string& name);
// Drops floor(fraction * n_sweeps) leading sweeps from every chain.
TraceMatrix burnin_discard(const TraceMatrix& traces, double fraction);

struct DiagnosticsConfig {
  std::vector<std::string> monitor = {"phi_", "psi_"};  // name prefixes
  double rhat_max = 1.5;
  double acf_max = 0.10;
  int acf_lag = 20;
  bool split = false;
};

struct DiagnosticRow {
  std::string name;
  double rhat;
  double acf_lag;  // chain-averaged autocorrelation at cfg.acf_lag
  double ess;
  bool pass;
};

std::vector<DiagnosticRow> diagnostics_report(const TraceMatrix& traces, const DiagnosticsConfig& cfg);
bool all_pass(const std::vector<DiagnosticRow>& rows);
std::string diagnostics_csv(const std::vector<DiagnosticRow>& rows);

}  // namespace picres
