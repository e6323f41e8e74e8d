#pragma once

#include <vector>

#include "picres/models.hpp"

namespace picres {

struct DevFactorPosterior {
  VectorXd Pi;
  MatrixXd Delta;
  MatrixXd precision;
};

// Whitened linear-Gaussian data: y ~ N(X beta, I).
struct WhitenedData {
  VectorXd y;
  MatrixXd X;
};

WhitenedData whiten_observations(const ObservationModel& om, const DependenceSpec& dep,
                                 const DevelopmentFactors& theta);

DevFactorPosterior dev_factor_full_conditional(const WhitenedData& data, const VectorXd& prior_mean,
                                               const VectorXd& prior_var);

// Entrywise precision and linear terms for the independent model with known scales.
DevFactorPosterior model_one_full_conditional(const ClaimsTriangle& tri, const DevelopmentFactors& scales,
                                              const VectorXd& prior_mean, const VectorXd& prior_var);

VectorXd draw_dev_factors(const DevFactorPosterior& post, Rng& rng);

// Per block S = U L U^T: tilde = L^{1/2} U x and x = U^T L^{-1/2} tilde.
VectorXd transform_dev_factors(const VectorXd& x, const std::vector<MatrixXd>& blocks);
VectorXd untransform_dev_factors(const VectorXd& tilde, const std::vector<MatrixXd>& blocks);
std::vector<MatrixXd> transform_blocks(const DependenceSpec& dep, const DevelopmentFactors& theta);
VectorXd untransform_dev_factors(const VectorXd& tilde, const DependenceSpec& dep, const DevelopmentFactors& theta);

// residuals: dim x n matrix of centered (whitened) observation columns.
InverseWishartParams covariance_full_conditional(const MatrixXd& residuals, const InverseWishartParams& prior);
std::vector<InverseWishartParams> covariance_full_conditional_blocks(const MatrixXd& residuals,
                                                                     const std::vector<InverseWishartParams>& priors);

struct InverseGammaParams {
  double shape;
  double scale;
};

InverseGammaParams hyper_variance_full_conditional(double value, double prior_mean, double alpha, double beta);

}  // namespace picres
