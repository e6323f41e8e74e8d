#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "picres/conjugate.hpp"
#include "picres/models.hpp"

namespace picres {

enum class ModelKind { I, II, III, IV };

const char* model_name(ModelKind k);
ModelKind parse_model(const std::string& s);

// Recursive mean and unbiased covariance.
struct RunningMoments {
  long n = 0;
  VectorXd mean;
  MatrixXd cov;

  RunningMoments() = default;
  explicit RunningMoments(int dim);
  int dim() const { return static_cast<int>(mean.size()); }
  void update(const VectorXd& x);
};

RunningMoments running_moments_update(RunningMoments rm, const VectorXd& x);

struct AMConfig {
  double w1 = 0.95;
  double adapt_scale = 2.38;
  double fixed_scale = 0.1;
  int warmup = 0;  // 0 means 2*d
  double iw_dof_offset = 10.0;
  bool continue_adapting = false;

  int warmup_for(int d) const { return warmup > 0 ? warmup : 2 * d; }
  double iw_dof(int d) const { return d + iw_dof_offset; }
  void validate() const;
};

VectorXd euclidean_am_propose(const VectorXd& x, const RunningMoments& rm, const AMConfig& cfg, Rng& rng);
// Log density of moving from `from` to `to` under the current mixture.
double euclidean_am_logdensity(const VectorXd& from, const VectorXd& to, const RunningMoments& rm,
                               const AMConfig& cfg);

struct IWProposal {
  MatrixXd proposal;
  double log_q_forward;   // log q(proposal)
  double log_q_backward;  // log q(current)
};

double manifold_iw_logdensity(const MatrixXd& S, const MatrixXd& history_mean, const MatrixXd& fixed_scale,
                              const AMConfig& cfg, bool adaptive);
// Mixture w1 IW(history_mean (p-d-1), p) + (1-w1) IW(fixed_scale, p); fixed component only when !adaptive.
IWProposal manifold_iw_propose(const MatrixXd& current, const MatrixXd& history_mean, const MatrixXd& fixed_scale,
                               const AMConfig& cfg, Rng& rng, bool adaptive = true);

bool mh_accept(double log_post_new, double log_post_old, double log_q_fwd, double log_q_bwd, Rng& rng);

struct ModelConfig {
  ModelKind kind = ModelKind::I;
  HyperPriors hyper;
  bool sample_hyper = true;
  bool sample_scales = false;      // Model I sigma^2/tau^2, Model IV Sigma_diag
  bool sample_covariance = true;   // Model II/III covariance, Model IV copula parameters
  DevelopmentFactors init;         // sigma/tau fixed scales and starting values
  DependenceSpec dep = ModelISpec{};
};

struct SamplerConfig {
  AMConfig am;
  std::uint64_t seed = 1;
  int chains = 4;
  int sweeps = 2000;
  int thin = 1;
  double burnin_fraction = 0.2;
  double init_jitter = 0.0;
};

struct ChainState {
  ParameterState params;
  MatrixXd levels;  // Model IV complete-data log levels, empty otherwise
  double log_posterior = 0.0;
};

struct AcceptanceRate {
  long proposed = 0;
  long accepted = 0;
  double rate() const { return proposed ? static_cast<double>(accepted) / proposed : 0.0; }
  void record(bool acc) {
    ++proposed;
    accepted += acc;
  }
};

struct AdaptiveState {
  bool adapting = true;
  std::vector<RunningMoments> aux;    // per accident year
  RunningMoments copula;
  std::vector<MatrixXd> iw_sum;       // per covariance block
  long iw_count = 0;
  AcceptanceRate aux_rate, copula_rate, cov_rate, scale_rate, dev_rate;
};

struct SamplerContext {
  ClaimsTriangle tri;
  ObservationModel om;
  ModelConfig model;
  AMConfig am;

  SamplerContext(const ClaimsTriangle& tri, const ModelConfig& model, const AMConfig& am);
};

double compute_log_posterior(const SamplerContext& ctx, const ChainState& state);
ChainState initial_state(const SamplerContext& ctx, double jitter, Rng& rng);
AdaptiveState initial_adaptation(const SamplerContext& ctx, const ChainState& state);

void augmented_data_update(ChainState& state, AdaptiveState& adapt, const SamplerContext& ctx, Rng& rng);
void gibbs_sweep(ChainState& state, AdaptiveState& adapt, const SamplerContext& ctx, Rng& rng);

// Deterministic column order.
std::vector<std::string> trace_names(const SamplerContext& ctx, const ChainState& state);
std::vector<double> trace_record(const SamplerContext& ctx, const ChainState& state);
// Rebuilds a state from a trace row; columns absent from the trace keep the template values.
ChainState state_from_trace(const SamplerContext& ctx, const ChainState& templ, const std::vector<std::string>& names,
                            const std::vector<double>& row);

struct ChainResult {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  AdaptiveState adapt;
  ChainState final_state;
};

ChainResult run_chain(const SamplerContext& ctx, const SamplerConfig& cfg, int chain);
std::vector<ChainResult> run_chains(const SamplerContext& ctx, const SamplerConfig& cfg);
std::vector<ChainResult> run_chains_serial(const SamplerContext& ctx, const SamplerConfig& cfg);

}  // namespace picres
