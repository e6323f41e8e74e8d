#pragma once

#include <vector>

#include <Eigen/Dense>

#include "picres/rng.hpp"

namespace picres {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Symmetric to 1e-12 and Cholesky pivots above 1e-10 * trace / dim.
bool is_spd(const MatrixXd& S);
void require_spd(const MatrixXd& S, const char* what);
double log_det_spd(const MatrixXd& S);

MatrixXd direct_sum(const std::vector<MatrixXd>& blocks);
MatrixXd kronecker(const MatrixXd& A, const MatrixXd& B);

struct Whitening {
  MatrixXd transform;          // W = Lambda^{-1/2} U^T
  MatrixXd inverse_transform;  // U Lambda^{1/2}
  VectorXd eigenvalues;
  MatrixXd eigenvectors;
};

Whitening spectral_whiten(const MatrixXd& S);

struct GaussianConditional {
  VectorXd mean;
  MatrixXd cov;
  std::vector<int> free_idx;
};

GaussianConditional gaussian_condition(const VectorXd& mu, const MatrixXd& S,
                                       const std::vector<int>& observed_idx,
                                       const VectorXd& observed_vals);

double mvn_logpdf(const VectorXd& x, const VectorXd& mu, const MatrixXd& S);
// Draw from N(mu, S) for PSD S via a clamped eigendecomposition.
VectorXd mvn_sample_psd(const VectorXd& mu, const MatrixXd& S, Rng& rng);

// X is p x n; Vec(X^T) ~ N(Vec(M^T), Sigma (x) Psi).
double matrix_normal_logpdf(const MatrixXd& X, const MatrixXd& M, const MatrixXd& Sigma,
                            const MatrixXd& Psi);

double log_multivariate_gamma(double a, int p);

struct InverseWishartParams {
  MatrixXd Lambda;
  double k = 0.0;
};

double inverse_wishart_logpdf(const MatrixXd& S, const InverseWishartParams& params);
MatrixXd inverse_wishart_sample(const InverseWishartParams& params, Rng& rng);
MatrixXd inverse_wishart_mean(const InverseWishartParams& params);

}  // namespace picres
