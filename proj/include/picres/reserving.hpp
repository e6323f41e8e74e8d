#pragma once

#include <cstdint>
#include <vector>

#include "picres/samplers.hpp"

namespace picres {

// Draws x (J+1) matrix of ultimate payments P(i,J); one predictive draw per posterior draw,
// each on its own RNG stream so the parallel and serial paths agree.
MatrixXd predictive_ultimate(const SamplerContext& ctx, const std::vector<ChainState>& draws, std::uint64_t seed);
MatrixXd predictive_ultimate_serial(const SamplerContext& ctx, const std::vector<ChainState>& draws,
                                    std::uint64_t seed);
VectorXd predictive_ultimate_one(const SamplerContext& ctx, const ChainState& draw, Rng& rng);

struct QuantileSummary {
  double mean = 0, sd = 0, q05 = 0, q25 = 0, q50 = 0, q75 = 0, q95 = 0;
};

// Linear-interpolation (type 7) sample quantile.
double sample_quantile(std::vector<double> x, double p);
QuantileSummary summarize(const VectorXd& x);

struct ReserveSummary {
  std::vector<QuantileSummary> per_accident;
  QuantileSummary total;
  MatrixXd samples;        // draws x (J+1)
  VectorXd total_samples;  // per-draw sum
};

ReserveSummary reserve_distribution(const MatrixXd& ultimates, const ClaimsTriangle& tri);
std::string reserve_csv(const ReserveSummary& r);

struct HistogramBin {
  double left, right;
  long count;
};

std::vector<HistogramBin> histogram(const VectorXd& x, int bins);
std::string histogram_csv(const std::vector<HistogramBin>& h);

struct BlockEigen {
  double mean = 0, sd = 0, q05 = 0, q95 = 0;
  VectorXd vector;  // averaged sign-normalized principal eigenvector, renormalized
};

// Largest eigenpair with the first nonzero component made positive.
std::pair<double, VectorXd> principal_eigen(const MatrixXd& S);
// draws[b] holds the draws of block b.
std::vector<BlockEigen> posterior_cov_eigen_summary(const std::vector<std::vector<MatrixXd>>& draws);
std::string eigen_csv(const std::vector<BlockEigen>& e);

}  // namespace picres
