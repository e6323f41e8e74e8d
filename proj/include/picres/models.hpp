#pragma once

#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "picres/copula.hpp"
#include "picres/matrix.hpp"
#include "picres/triangle.hpp"

namespace picres {

struct DevelopmentFactors {
  VectorXd phi;    // J+1
  VectorXd psi;    // J
  VectorXd sigma;  // J+1
  VectorXd tau;    // J

  int J() const { return static_cast<int>(phi.size()) - 1; }
  void validate() const;
  // (phi_0..phi_J, psi_0..psi_{J-1})
  VectorXd beta() const;
  void set_beta(const VectorXd& beta);
};

DevelopmentFactors make_factors(int J, double phi, double psi, double sigma, double tau);

struct DerivedScales {
  VectorXd nu2, omega2, eta, mu;
};

DerivedScales derived_scales(const DevelopmentFactors& theta);

struct IndependentLoglik {
  double payment = 0.0;
  double diagonal = 0.0;
  double incurred = 0.0;
  double total() const { return payment + diagonal + incurred; }
};

IndependentLoglik loglik_independent_components(const ClaimsTriangle& tri, const DevelopmentFactors& theta);
double loglik_independent(const ClaimsTriangle& tri, const DevelopmentFactors& theta);
// Sum of the log P and log I Jacobian terms that loglik_independent subtracts.
double loglik_jacobian(const ClaimsTriangle& tri);

struct ChainLadderMoments {
  double cond_mean;
  double log_location;
  double log_variance;
};

ChainLadderMoments chain_ladder_moments(const DevelopmentFactors& theta, double P_prev, int j);
double expected_ultimate(const DevelopmentFactors& theta);

// ---- dependence structures ----

struct ModelISpec {};

struct ModelIISpec {
  MatrixXd Sigma;                // (2J+1) in canonical ratio order
  MatrixXd Omega;                // (J+1); empty means identity
  std::vector<MatrixXd> per_year;  // optional per-accident-year Sigma_i (Omega must be identity)
};

struct TelescopingBlockDiag {
  std::vector<MatrixXd> payment_blocks;   // dims J+1, J, ..., 1
  std::vector<MatrixXd> incurred_blocks;  // dims J, J-1, ..., 1

  static TelescopingBlockDiag identity(int J);
  static TelescopingBlockDiag diagonal(const VectorXd& sigma2, const VectorXd& tau2);
  void validate(int J) const;
  MatrixXd assemble() const;
  std::vector<MatrixXd> blocks() const;  // payment blocks then incurred blocks
};

struct ModelIIISpec {
  TelescopingBlockDiag tele;
};

struct ModelIVSpec {
  MixtureCopula mix_P;
  MixtureCopula mix_I;
  VectorXd Sigma_diag;  // 2J+1, aligned with beta
};

using DependenceSpec = std::variant<ModelISpec, ModelIISpec, ModelIIISpec, ModelIVSpec>;

// ---- Gaussian observation representation (Models I-III) ----
//
// Per accident year the canonical ratio vector is (xi_0..xi_J, g_0..g_{J-1}) with
// g_j = log(I(j+1)/I(j)) ~ mean Psi_j. Observed functionals are the observed xi,
// the observed g, and for i >= 1 the diagonal ratio log(I(i,J-i)/P(i,J-i)).

struct ObservationModel {
  int J = 0;
  std::vector<Cell> labels;          // canonical (accident-major) order
  VectorXd y;
  MatrixXd design;                   // n_obs x (2J+1)
  std::vector<int> year_offset;      // J+2 entries
};

ObservationModel build_observation_model(const ClaimsTriangle& tri);
MatrixXd observation_operator(int J, int accident);
bool years_independent(const DependenceSpec& dep);
MatrixXd ratio_covariance_year(int J, int accident, const DependenceSpec& dep, const DevelopmentFactors& theta);
MatrixXd ratio_covariance_full(int J, const DependenceSpec& dep, const DevelopmentFactors& theta);
// Observation covariance, canonical order.
MatrixXd observation_covariance(const ObservationModel& om, const DependenceSpec& dep, const DevelopmentFactors& theta);
std::vector<MatrixXd> observation_covariance_blocks(const ObservationModel& om, const DependenceSpec& dep,
                                                    const DevelopmentFactors& theta);
double loglik_gaussian(const ObservationModel& om, const DevelopmentFactors& theta, const DependenceSpec& dep);
// x_obs is the observation vector reordered by `plan` (whose from_cells are om.labels).
double loglik_gaussian_copula(const VectorXd& x_obs, const DevelopmentFactors& theta, const DependenceSpec& dep,
                              const PermutationPlan& plan, const ObservationModel& om);

// ---- Model IV log-level state ----
//
// levels is (J+1) x (2J+1): columns 0..J hold log P(i,j), columns J+1..2J hold
// log I(i,j) for j < J. log I(i,J) is log P(i,J) by construction.

MatrixXd observed_levels(const ClaimsTriangle& tri);  // NaN in aux cells
bool level_observed(int J, int accident, int col);
Cell level_cell(int J, int accident, int col);

struct MixtureLoglik {
  double copula_payment = 0.0;
  double copula_incurred = 0.0;
  double marginal_observed = 0.0;
  double aux_prior = 0.0;
  double total() const { return copula_payment + copula_incurred + marginal_observed + aux_prior; }
};

constexpr double kCopulaClamp = 1e-12;

MixtureLoglik loglik_mixture_copula_full(const MatrixXd& levels, const DevelopmentFactors& theta,
                                         const ModelIVSpec& spec);
// Copula terms of one accident year (payment block + incurred block).
double copula_year_logdensity(const MatrixXd& levels, int accident, const VectorXd& beta, const ModelIVSpec& spec);
double observed_data_loglik_gaussian(const ClaimsTriangle& tri, const DevelopmentFactors& theta, const ModelIVSpec& spec);
struct MCEstimate {
  double value;
  double std_error;
};
MCEstimate observed_data_loglik_mc(const ClaimsTriangle& tri, const DevelopmentFactors& theta, const ModelIVSpec& spec,
                                   int n_samples, Rng& rng);

// ---- priors ----

struct CopulaPriorBounds {
  double clayton_lo = 0.0, clayton_hi = 50.0;
  double gumbel_lo = 1.0, gumbel_hi = 50.0;
  double frank_lo = 0.0, frank_hi = 50.0;
  double lo(Family f) const;
  double hi(Family f) const;
};

struct HyperPriors {
  VectorXd phi_mean, phi_var, psi_mean, psi_var;
  VectorXd alpha_s, beta_s, alpha_t, beta_t;
  double scale_alpha = 1.0, scale_beta = 1.0;
  double iw_scale = 1.0, iw_dof_offset = 3.0;
  CopulaPriorBounds copula;

  static HyperPriors defaults(int J);
  InverseWishartParams iw_prior(int dim) const;
  void validate(int J) const;
};

struct ParameterState {
  DevelopmentFactors theta;
  VectorXd s2, t2;
  DependenceSpec dep;
};

double normal_logpdf(double x, double mean, double var);
double inverse_gamma_logpdf(double x, double shape, double scale);
double log_prior(const ParameterState& state, const HyperPriors& hyper);

}  // namespace picres
