#include "picres/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "picres/errors.hpp"

namespace picres {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double clamp_unit(double u) { return std::clamp(u, kCopulaClamp, 1.0 - kCopulaClamp); }

}  // namespace

double normal_logpdf(double x, double mean, double var) {
  const double r = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + r * r / var);
}

double inverse_gamma_logpdf(double x, double shape, double scale) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

void DevelopmentFactors::validate() const {
  const int j = J();
  if (j < 0 || psi.size() != j || sigma.size() != j + 1 || tau.size() != j)
    throw Error(ErrorKind::DimMismatch, "development factor lengths must be J+1, J, J+1, J");
  for (Eigen::Index k = 0; k < sigma.size(); ++k)
    if (!(sigma(k) > 0.0)) throw Error(ErrorKind::ParamOutOfDomain, "sigma must be positive");
  for (Eigen::Index k = 0; k < tau.size(); ++k)
    if (!(tau(k) > 0.0)) throw Error(ErrorKind::ParamOutOfDomain, "tau must be positive");
}

VectorXd DevelopmentFactors::beta() const {
  VectorXd b(phi.size() + psi.size());
  b << phi, psi;
  return b;
}

void DevelopmentFactors::set_beta(const VectorXd& b) {
  if (b.size() != phi.size() + psi.size()) throw Error(ErrorKind::DimMismatch, "beta length");
  phi = b.head(phi.size());
  psi = b.tail(psi.size());
}

DevelopmentFactors make_factors(int J, double phi, double psi, double sigma, double tau) {
  DevelopmentFactors t;
  t.phi = VectorXd::Constant(J + 1, phi);
  t.psi = VectorXd::Constant(J, psi);
  t.sigma = VectorXd::Constant(J + 1, sigma);
  t.tau = VectorXd::Constant(J, tau);
  return t;
}

DerivedScales derived_scales(const DevelopmentFactors& theta) {
  const int J = theta.J();
  DerivedScales d;
  d.nu2.resize(J + 1);
  d.omega2.resize(J + 1);
  d.eta.resize(J + 1);
  d.mu.resize(J + 1);
  const double sig_total = theta.sigma.squaredNorm();
  const double phi_total = theta.phi.sum();
  double om = 0.0, eta = 0.0;
  for (int j = 0; j <= J; ++j) {
    om += theta.sigma(j) * theta.sigma(j);
    eta += theta.phi(j);
    double tau_tail = 0.0, psi_tail = 0.0;
    for (int n = j; n < J; ++n) {
      tau_tail += theta.tau(n) * theta.tau(n);
      psi_tail += theta.psi(n);
    }
    d.omega2(j) = om;
    d.nu2(j) = sig_total + tau_tail;
    d.eta(j) = eta;
    d.mu(j) = phi_total - psi_tail;
  }
  for (int j = 0; j < J; ++j)
    if (!(d.nu2(j) > d.omega2(j)))
      throw Error(ErrorKind::ScaleOrderingViolated, "nu^2 <= omega^2 at j=" + std::to_string(j));
  return d;
}

IndependentLoglik loglik_independent_components(const ClaimsTriangle& tri, const DevelopmentFactors& theta) {
  const int J = tri.J();
  if (theta.J() != J) throw Error(ErrorKind::DimMismatch, "theta and triangle J differ");
  theta.validate();
  const DerivedScales ds = derived_scales(theta);
  IndependentLoglik out;
  for (int i = 0; i <= J; ++i) {
    for (int j = 0; j <= J - i; ++j) {
      const double xi = j == 0 ? std::log(tri.P(i, 0)) : std::log(tri.P(i, j) / tri.P(i, j - 1));
      out.payment += normal_logpdf(xi, theta.phi(j), theta.sigma(j) * theta.sigma(j)) - std::log(tri.P(i, j));
    }
  }
  for (int i = 1; i <= J; ++i) {
    const int l = J - i;
    const double r = std::log(tri.I(i, l) / tri.P(i, l));
    out.diagonal += normal_logpdf(r, ds.mu(l) - ds.eta(l), ds.nu2(l) - ds.omega2(l)) - std::log(tri.I(i, l));
  }
  for (int j = 0; j < J; ++j) {
    for (int i = 0; i <= J - j - 1; ++i) {
      // log(I_j / I_{j+1}) has mean -Psi_j.
      const double z = std::log(tri.I(i, j) / tri.I(i, j + 1));
      out.incurred += normal_logpdf(z, -theta.psi(j), theta.tau(j) * theta.tau(j)) - std::log(tri.I(i, j));
    }
  }
  return out;
}

double loglik_independent(const ClaimsTriangle& tri, const DevelopmentFactors& theta) {
  return loglik_independent_components(tri, theta).total();
}

double loglik_jacobian(const ClaimsTriangle& tri) {
  const int J = tri.J();
  double out = 0.0;
  for (int i = 0; i <= J; ++i) {
    for (int j = 0; j <= J - i; ++j) out += std::log(tri.P(i, j));
    for (int j = 0; j <= std::min(J - i, J - 1); ++j) out += std::log(tri.I(i, j));
  }
  return out;
}

ChainLadderMoments chain_ladder_moments(const DevelopmentFactors& theta, double P_prev, int j) {
  if (j < 1 || j > theta.J()) throw Error(ErrorKind::DimMismatch, "chain-ladder index out of range");
  const double s2 = theta.sigma(j) * theta.sigma(j);
  return {P_prev * std::exp(theta.phi(j) + 0.5 * s2), std::log(P_prev) + theta.phi(j), s2};
}

double expected_ultimate(const DevelopmentFactors& theta) {
  return std::exp(theta.phi.sum() + 0.5 * theta.sigma.squaredNorm());
}

// ---- telescoping blocks ----

TelescopingBlockDiag TelescopingBlockDiag::identity(int J) {
  TelescopingBlockDiag t;
  for (int i = 0; i <= J; ++i) t.payment_blocks.push_back(MatrixXd::Identity(J - i + 1, J - i + 1));
  for (int i = 0; i < J; ++i) t.incurred_blocks.push_back(MatrixXd::Identity(J - i, J - i));
  return t;
}

TelescopingBlockDiag TelescopingBlockDiag::diagonal(const VectorXd& sigma2, const VectorXd& tau2) {
  const int J = static_cast<int>(sigma2.size()) - 1;
  TelescopingBlockDiag t;
  for (int i = 0; i <= J; ++i) t.payment_blocks.push_back(sigma2.head(J - i + 1).asDiagonal());
  for (int i = 0; i < J; ++i) t.incurred_blocks.push_back(tau2.head(J - i).asDiagonal());
  return t;
}

void TelescopingBlockDiag::validate(int J) const {
  if (static_cast<int>(payment_blocks.size()) != J + 1 || static_cast<int>(incurred_blocks.size()) != J)
    throw Error(ErrorKind::DimMismatch, "telescoping block count mismatch");
  for (int i = 0; i <= J; ++i) {
    if (payment_blocks[i].rows() != J - i + 1) throw Error(ErrorKind::DimMismatch, "payment block size");
    require_spd(payment_blocks[i], "payment block");
  }
  for (int i = 0; i < J; ++i) {
    if (incurred_blocks[i].rows() != J - i) throw Error(ErrorKind::DimMismatch, "incurred block size");
    require_spd(incurred_blocks[i], "incurred block");
  }
}

std::vector<MatrixXd> TelescopingBlockDiag::blocks() const {
  std::vector<MatrixXd> out(payment_blocks);
  out.insert(out.end(), incurred_blocks.begin(), incurred_blocks.end());
  return out;
}

MatrixXd TelescopingBlockDiag::assemble() const { return direct_sum(blocks()); }

// ---- observation model ----

MatrixXd observation_operator(int J, int i) {
  const int dim = 2 * J + 1;
  const int l = J - i;
  const int rows = (l + 1) + l + (i >= 1 ? 1 : 0);
  MatrixXd L = MatrixXd::Zero(rows, dim);
  int r = 0;
  for (int j = 0; j <= l; ++j) L(r++, j) = 1.0;
  for (int j = 0; j < l; ++j) L(r++, J + 1 + j) = 1.0;
  if (i >= 1) {
    for (int m = l + 1; m <= J; ++m) L(r, m) = 1.0;
    for (int n = l; n < J; ++n) L(r, J + 1 + n) = -1.0;
  }
  return L;
}

ObservationModel build_observation_model(const ClaimsTriangle& tri) {
  const int J = tri.J();
  const LogDevelopmentRatios lr = log_ratios(tri);
  ObservationModel om;
  om.J = J;
  std::vector<double> y;
  std::vector<MatrixXd> Ls;
  for (int i = 0; i <= J; ++i) {
    om.year_offset.push_back(static_cast<int>(y.size()));
    const int l = J - i;
    for (int j = 0; j <= l; ++j) {
      om.labels.push_back({i, j, Source::P});
      y.push_back(lr.xi(i, j));
    }
    for (int j = 0; j < l; ++j) {
      om.labels.push_back({i, j, Source::I});
      y.push_back(-lr.zeta(i, j));
    }
    if (i >= 1) {
      om.labels.push_back({i, l, Source::PI});
      y.push_back(std::log(tri.I(i, l)) - std::log(tri.P(i, l)));
    }
    Ls.push_back(observation_operator(J, i));
  }
  om.year_offset.push_back(static_cast<int>(y.size()));
  om.y = Eigen::Map<VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  om.design.resize(static_cast<Eigen::Index>(y.size()), 2 * J + 1);
  for (int i = 0; i <= J; ++i) om.design.middleRows(om.year_offset[i], Ls[i].rows()) = Ls[i];
  return om;
}

bool years_independent(const DependenceSpec& dep) {
  if (const auto* m2 = std::get_if<ModelIISpec>(&dep)) {
    if (m2->Omega.size() == 0) return true;
    const MatrixXd& O = m2->Omega;
    return (O - MatrixXd(O.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
  }
  return true;
}

MatrixXd ratio_covariance_year(int J, int i, const DependenceSpec& dep, const DevelopmentFactors& theta) {
  const int dim = 2 * J + 1;
  if (std::holds_alternative<ModelISpec>(dep)) {
    VectorXd v(dim);
    v << theta.sigma.array().square().matrix(), theta.tau.array().square().matrix();
    return v.asDiagonal();
  }
  if (const auto* m2 = std::get_if<ModelIISpec>(&dep)) {
    if (!m2->per_year.empty()) return m2->per_year.at(i);
    const double w = m2->Omega.size() == 0 ? 1.0 : m2->Omega(i, i);
    return w * m2->Sigma;
  }
  if (const auto* m3 = std::get_if<ModelIIISpec>(&dep)) {
    const auto& t = m3->tele;
    const int l = J - i;
    MatrixXd C = MatrixXd::Zero(dim, dim);
    C.topLeftCorner(l + 1, l + 1) = t.payment_blocks.at(i);
    for (int m = l + 1; m <= J; ++m) C(m, m) = t.payment_blocks[0](m, m);
    if (l > 0) C.block(J + 1, J + 1, l, l) = t.incurred_blocks.at(i);
    for (int n = l; n < J; ++n) C(J + 1 + n, J + 1 + n) = t.incurred_blocks[0](n, n);
    return C;
  }
  throw Error(ErrorKind::DimMismatch, "Model IV has no Gaussian ratio covariance");
}

MatrixXd ratio_covariance_full(int J, const DependenceSpec& dep, const DevelopmentFactors& theta) {
  if (const auto* m2 = std::get_if<ModelIISpec>(&dep); m2 && !years_independent(dep))
    return kronecker(m2->Omega, m2->Sigma);
  std::vector<MatrixXd> blocks;
  for (int i = 0; i <= J; ++i) blocks.push_back(ratio_covariance_year(J, i, dep, theta));
  return direct_sum(blocks);
}

std::vector<MatrixXd> observation_covariance_blocks(const ObservationModel& om, const DependenceSpec& dep,
                                                    const DevelopmentFactors& theta) {
  if (!years_independent(dep)) throw Error(ErrorKind::DimMismatch, "years are not independent");
  std::vector<MatrixXd> out;
  for (int i = 0; i <= om.J; ++i) {
    const MatrixXd L = om.design.middleRows(om.year_offset[i], om.year_offset[i + 1] - om.year_offset[i]);
    out.push_back(L * ratio_covariance_year(om.J, i, dep, theta) * L.transpose());
  }
  return out;
}

MatrixXd observation_covariance(const ObservationModel& om, const DependenceSpec& dep,
                                const DevelopmentFactors& theta) {
  if (years_independent(dep)) return direct_sum(observation_covariance_blocks(om, dep, theta));
  const int J = om.J;
  const int dim = 2 * J + 1;
  MatrixXd L = MatrixXd::Zero(om.y.size(), (J + 1) * dim);
  for (int i = 0; i <= J; ++i) {
    const int rows = om.year_offset[i + 1] - om.year_offset[i];
    L.block(om.year_offset[i], i * dim, rows, dim) = om.design.middleRows(om.year_offset[i], rows);
  }
  return L * ratio_covariance_full(J, dep, theta) * L.transpose();
}

double loglik_gaussian(const ObservationModel& om, const DevelopmentFactors& theta, const DependenceSpec& dep) {
  const VectorXd mean = om.design * theta.beta();
  if (!years_independent(dep)) return mvn_logpdf(om.y, mean, observation_covariance(om, dep, theta));
  const auto blocks = observation_covariance_blocks(om, dep, theta);
  double out = 0.0;
  for (int i = 0; i <= om.J; ++i) {
    const int off = om.year_offset[i];
    const int n = om.year_offset[i + 1] - off;
    out += mvn_logpdf(om.y.segment(off, n), mean.segment(off, n), blocks[i]);
  }
  return out;
}

double loglik_gaussian_copula(const VectorXd& x_obs, const DevelopmentFactors& theta, const DependenceSpec& dep,
                              const PermutationPlan& plan, const ObservationModel& om) {
  if (plan.total_len() != static_cast<std::size_t>(om.y.size()) || x_obs.size() != om.y.size())
    throw Error(ErrorKind::LengthMismatch, "observation vector and plan lengths differ");
  const VectorXd mean = apply_permutation(VectorXd(om.design * theta.beta()), plan);
  const MatrixXd S = apply_permutation(observation_covariance(om, dep, theta), plan);
  return mvn_logpdf(x_obs, mean, S);
}

// ---- Model IV ----

bool level_observed(int J, int i, int col) {
  if (col <= J) return col <= J - i;
  return col - J - 1 <= J - i;
}

Cell level_cell(int J, int i, int col) {
  if (col <= J) return {i, col, Source::P};
  return {i, col - J - 1, Source::I};
}

MatrixXd observed_levels(const ClaimsTriangle& tri) {
  const int J = tri.J();
  MatrixXd X = MatrixXd::Constant(J + 1, 2 * J + 1, std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i <= J; ++i)
    for (int c = 0; c <= 2 * J; ++c) {
      if (!level_observed(J, i, c)) continue;
      X(i, c) = c <= J ? std::log(tri.P(i, c)) : std::log(tri.I(i, c - J - 1));
    }
  return X;
}

double copula_year_logdensity(const MatrixXd& levels, int i, const VectorXd& beta, const ModelIVSpec& spec) {
  const int J = static_cast<int>(levels.rows()) - 1;
  double out = 0.0;
  if (!spec.mix_P.is_independence()) {
    VectorXd u(J + 1);
    for (int c = 0; c <= J; ++c)
      u(c) = clamp_unit(normal_cdf((levels(i, c) - beta(c)) / std::sqrt(spec.Sigma_diag(c))));
    out += mixture_logdensity(u, spec.mix_P);
  }
  if (J >= 1 && !spec.mix_I.is_independence()) {
    VectorXd u(J);
    for (int j = 0; j < J; ++j) {
      const int c = J + 1 + j;
      u(j) = clamp_unit(normal_cdf((levels(i, c) - beta(c)) / std::sqrt(spec.Sigma_diag(c))));
    }
    out += mixture_logdensity(u, spec.mix_I);
  }
  return out;
}

MixtureLoglik loglik_mixture_copula_full(const MatrixXd& levels, const DevelopmentFactors& theta,
                                         const ModelIVSpec& spec) {
  const int J = theta.J();
  if (levels.rows() != J + 1 || levels.cols() != 2 * J + 1 || spec.Sigma_diag.size() != 2 * J + 1)
    throw Error(ErrorKind::DimMismatch, "Model IV state dimensions");
  for (Eigen::Index c = 0; c < spec.Sigma_diag.size(); ++c)
    if (!(spec.Sigma_diag(c) > 0.0)) throw Error(ErrorKind::ParamOutOfDomain, "Sigma_diag must be positive");
  const VectorXd beta = theta.beta();
  MixtureLoglik out;
  for (int i = 0; i <= J; ++i) {
    for (int c = 0; c <= 2 * J; ++c) {
      const double lp = normal_logpdf(levels(i, c), beta(c), spec.Sigma_diag(c));
      (level_observed(J, i, c) ? out.marginal_observed : out.aux_prior) += lp;
    }
    if (!spec.mix_P.is_independence()) {
      VectorXd u(J + 1);
      for (int c = 0; c <= J; ++c)
        u(c) = clamp_unit(normal_cdf((levels(i, c) - beta(c)) / std::sqrt(spec.Sigma_diag(c))));
      out.copula_payment += mixture_logdensity(u, spec.mix_P);
    }
    if (J >= 1 && !spec.mix_I.is_independence()) {
      VectorXd u(J);
      for (int j = 0; j < J; ++j) {
        const int c = J + 1 + j;
        u(j) = clamp_unit(normal_cdf((levels(i, c) - beta(c)) / std::sqrt(spec.Sigma_diag(c))));
      }
      out.copula_incurred += mixture_logdensity(u, spec.mix_I);
    }
  }
  return out;
}

double observed_data_loglik_gaussian(const ClaimsTriangle& tri, const DevelopmentFactors& theta,
                                     const ModelIVSpec& spec) {
  const int J = tri.J();
  const MatrixXd X = observed_levels(tri);
  const VectorXd beta = theta.beta();
  double out = 0.0;
  for (int i = 0; i <= J; ++i)
    for (int c = 0; c <= 2 * J; ++c)
      if (level_observed(J, i, c)) out += normal_logpdf(X(i, c), beta(c), spec.Sigma_diag(c));
  return out;
}

MCEstimate observed_data_loglik_mc(const ClaimsTriangle& tri, const DevelopmentFactors& theta,
                                   const ModelIVSpec& spec, int n_samples, Rng& rng) {
  if (n_samples < 1) throw Error(ErrorKind::DimMismatch, "n_samples must be positive");
  const int J = tri.J();
  MatrixXd X = observed_levels(tri);
  const VectorXd beta = theta.beta();
  double value = observed_data_loglik_gaussian(tri, theta, spec);
  double var = 0.0;
  for (int i = 0; i <= J; ++i) {
    std::vector<double> lw(n_samples);
    for (int s = 0; s < n_samples; ++s) {
      for (int c = 0; c <= 2 * J; ++c)
        if (!level_observed(J, i, c)) X(i, c) = beta(c) + std::sqrt(spec.Sigma_diag(c)) * std_normal(rng);
      lw[s] = copula_year_logdensity(X, i, beta, spec);
    }
    const double m = *std::max_element(lw.begin(), lw.end());
    double sum = 0.0, sum2 = 0.0;
    for (double v : lw) {
      const double w = std::exp(v - m);
      sum += w;
      sum2 += w * w;
    }
    const double mean = sum / n_samples;
    value += m + std::log(mean);
    if (n_samples > 1) {
      const double sd = std::sqrt(std::max(0.0, sum2 / n_samples - mean * mean) * n_samples / (n_samples - 1));
      const double rel = sd / (mean * std::sqrt(static_cast<double>(n_samples)));
      var += rel * rel;
    }
  }
  return {value, std::sqrt(var)};
}

// ---- priors ----

double CopulaPriorBounds::lo(Family f) const {
  switch (f) {
    case Family::Clayton: return clayton_lo;
    case Family::Gumbel: return gumbel_lo;
    case Family::Frank: return frank_lo;
  }
  return 0.0;
}

double CopulaPriorBounds::hi(Family f) const {
  switch (f) {
    case Family::Clayton: return clayton_hi;
    case Family::Gumbel: return gumbel_hi;
    case Family::Frank: return frank_hi;
  }
  return 0.0;
}

HyperPriors HyperPriors::defaults(int J) {
  HyperPriors h;
  h.phi_mean = VectorXd::Zero(J + 1);
  h.phi_var = VectorXd::Constant(J + 1, 100.0);
  h.psi_mean = VectorXd::Zero(J);
  h.psi_var = VectorXd::Constant(J, 100.0);
  h.alpha_s = VectorXd::Ones(J + 1);
  h.beta_s = VectorXd::Ones(J + 1);
  h.alpha_t = VectorXd::Ones(J);
  h.beta_t = VectorXd::Ones(J);
  return h;
}

InverseWishartParams HyperPriors::iw_prior(int dim) const {
  return {iw_scale * MatrixXd::Identity(dim, dim), dim + iw_dof_offset};
}

void HyperPriors::validate(int J) const {
  auto check = [](const VectorXd& v, Eigen::Index n, const char* name, bool positive) {
    if (v.size() != n) throw Error(ErrorKind::ConfigError, std::string(name) + " has wrong length");
    if (positive && !(v.array() > 0.0).all())
      throw Error(ErrorKind::ConfigError, std::string(name) + " must be positive");
  };
  check(phi_mean, J + 1, "phi_mean", false);
  check(phi_var, J + 1, "phi_var", true);
  check(psi_mean, J, "psi_mean", false);
  check(psi_var, J, "psi_var", true);
  check(alpha_s, J + 1, "alpha_s", true);
  check(beta_s, J + 1, "beta_s", true);
  check(alpha_t, J, "alpha_t", true);
  check(beta_t, J, "beta_t", true);
  if (!(scale_alpha > 0 && scale_beta > 0 && iw_scale > 0 && iw_dof_offset > 0))
    throw Error(ErrorKind::ConfigError, "prior scale parameters must be positive");
}

double log_prior(const ParameterState& st, const HyperPriors& h) {
  const auto& th = st.theta;
  const int J = th.J();
  double out = 0.0;
  for (int j = 0; j <= J; ++j) {
    out += normal_logpdf(th.phi(j), h.phi_mean(j), st.s2(j));
    out += inverse_gamma_logpdf(st.s2(j), h.alpha_s(j), h.beta_s(j));
  }
  for (int j = 0; j < J; ++j) {
    out += normal_logpdf(th.psi(j), h.psi_mean(j), st.t2(j));
    out += inverse_gamma_logpdf(st.t2(j), h.alpha_t(j), h.beta_t(j));
  }
  if (std::holds_alternative<ModelISpec>(st.dep)) {
    for (int j = 0; j <= J; ++j) out += inverse_gamma_logpdf(th.sigma(j) * th.sigma(j), h.scale_alpha, h.scale_beta);
    for (int j = 0; j < J; ++j) out += inverse_gamma_logpdf(th.tau(j) * th.tau(j), h.scale_alpha, h.scale_beta);
  } else if (const auto* m2 = std::get_if<ModelIISpec>(&st.dep)) {
    if (m2->per_year.empty()) {
      out += inverse_wishart_logpdf(m2->Sigma, h.iw_prior(static_cast<int>(m2->Sigma.rows())));
    } else {
      for (const auto& S : m2->per_year) out += inverse_wishart_logpdf(S, h.iw_prior(static_cast<int>(S.rows())));
    }
  } else if (const auto* m3 = std::get_if<ModelIIISpec>(&st.dep)) {
    for (const auto& B : m3->tele.blocks()) out += inverse_wishart_logpdf(B, h.iw_prior(static_cast<int>(B.rows())));
  } else if (const auto* m4 = std::get_if<ModelIVSpec>(&st.dep)) {
    for (Eigen::Index c = 0; c < m4->Sigma_diag.size(); ++c)
      out += inverse_gamma_logpdf(m4->Sigma_diag(c), h.scale_alpha, h.scale_beta);
    for (const auto* mix : {&m4->mix_P, &m4->mix_I}) {
      for (const auto& [w, p] : mix->components()) {
        const double lo = h.copula.lo(p.family), hi = h.copula.hi(p.family);
        if (!(p.rho >= lo && p.rho <= hi)) return kNegInf;
        out -= std::log(hi - lo);
      }
    }
  }
  return out;
}

}  // namespace picres
