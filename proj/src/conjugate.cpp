#include "picres/conjugate.hpp"

#include <cmath>

#include "picres/errors.hpp"

namespace picres {

namespace {

DevFactorPosterior finish(const MatrixXd& A, const VectorXd& rhs) {
  const MatrixXd As = 0.5 * (A + A.transpose());
  Eigen::LLT<MatrixXd> llt(As);
  if (llt.info() != Eigen::Success || !is_spd(As))
    throw Error(ErrorKind::NotSPD, "development-factor posterior precision is not SPD");
  DevFactorPosterior post;
  post.precision = As;
  post.Pi = llt.solve(rhs);
  post.Delta = llt.solve(MatrixXd::Identity(As.rows(), As.cols()));
  post.Delta = 0.5 * (post.Delta + post.Delta.transpose());
  return post;
}

}  // namespace

WhitenedData whiten_observations(const ObservationModel& om, const DependenceSpec& dep,
                                 const DevelopmentFactors& theta) {
  WhitenedData out;
  out.y.resize(om.y.size());
  out.X.resize(om.design.rows(), om.design.cols());
  if (!years_independent(dep)) {
    const Whitening w = spectral_whiten(observation_covariance(om, dep, theta));
    out.y = w.transform * om.y;
    out.X = w.transform * om.design;
    return out;
  }
  const auto blocks = observation_covariance_blocks(om, dep, theta);
  for (int i = 0; i <= om.J; ++i) {
    const int off = om.year_offset[i];
    const int n = om.year_offset[i + 1] - off;
    const Whitening w = spectral_whiten(blocks[i]);
    out.y.segment(off, n) = w.transform * om.y.segment(off, n);
    out.X.middleRows(off, n) = w.transform * om.design.middleRows(off, n);
  }
  return out;
}

DevFactorPosterior dev_factor_full_conditional(const WhitenedData& data, const VectorXd& prior_mean,
                                               const VectorXd& prior_var) {
  if (prior_mean.size() != data.X.cols() || prior_var.size() != data.X.cols())
    throw Error(ErrorKind::DimMismatch, "prior length does not match design");
  MatrixXd A = data.X.transpose() * data.X;
  A.diagonal() += prior_var.cwiseInverse();
  const VectorXd rhs = data.X.transpose() * data.y + prior_mean.cwiseQuotient(prior_var);
  return finish(A, rhs);
}

DevFactorPosterior model_one_full_conditional(const ClaimsTriangle& tri, const DevelopmentFactors& scales,
                                              const VectorXd& prior_mean, const VectorXd& prior_var) {
  const int J = tri.J();
  const int dim = 2 * J + 1;
  if (scales.J() != J || prior_mean.size() != dim || prior_var.size() != dim)
    throw Error(ErrorKind::DimMismatch, "model one conditional dimensions");
  const DerivedScales ds = derived_scales(scales);
  const LogDevelopmentRatios lr = log_ratios(tri);
  // inv_v(l) belongs to accident year i = J - l.
  VectorXd inv_v(std::max(J, 0));
  for (int l = 0; l < J; ++l) inv_v(l) = 1.0 / (ds.nu2(l) - ds.omega2(l));
  auto cum = [&](int hi) {  // sum_{l=0}^{hi} inv_v(l)
    double s = 0.0;
    for (int l = 0; l <= hi && l < J; ++l) s += inv_v(l);
    return s;
  };
  MatrixXd A = MatrixXd::Zero(dim, dim);
  for (int n = 0; n <= J; ++n) {
    const double s2 = scales.sigma(n) * scales.sigma(n);
    for (int m = 0; m <= J; ++m) {
      A(n, m) = cum(std::min(n, m) - 1);
      if (n == m) A(n, m) += 1.0 / prior_var(n) + (J - n + 1) / s2;
    }
    for (int m = 0; m < J; ++m) {
      const double v = -cum(std::min(n - 1, m));
      A(n, J + 1 + m) = v;
      A(J + 1 + m, n) = v;
    }
  }
  for (int n = 0; n < J; ++n) {
    const double t2 = scales.tau(n) * scales.tau(n);
    for (int m = 0; m < J; ++m) {
      A(J + 1 + n, J + 1 + m) = cum(std::min(n, m));
      if (n == m) A(J + 1 + n, J + 1 + m) += 1.0 / prior_var(J + 1 + n) + (J - n) / t2;
    }
  }
  VectorXd r = VectorXd::Zero(J + 1);
  for (int i = 1; i <= J; ++i) r(i) = std::log(tri.I(i, J - i) / tri.P(i, J - i));
  VectorXd rhs(dim);
  for (int j = 0; j <= J; ++j) {
    double sx = 0.0;
    for (int i = 0; i <= J - j; ++i) sx += lr.xi(i, j);
    double sr = 0.0;
    for (int i = J - j + 1; i <= J; ++i) sr += r(i) * inv_v(J - i);
    rhs(j) = prior_mean(j) / prior_var(j) + sx / (scales.sigma(j) * scales.sigma(j)) + sr;
  }
  for (int j = 0; j < J; ++j) {
    double sg = 0.0;
    for (int i = 0; i <= J - j - 1; ++i) sg -= lr.zeta(i, j);
    double sr = 0.0;
    for (int i = J - j; i <= J; ++i) sr += r(i) * inv_v(J - i);
    rhs(J + 1 + j) = prior_mean(J + 1 + j) / prior_var(J + 1 + j) + sg / (scales.tau(j) * scales.tau(j)) - sr;
  }
  return finish(A, rhs);
}

VectorXd draw_dev_factors(const DevFactorPosterior& post, Rng& rng) {
  Eigen::LLT<MatrixXd> llt(post.precision);
  VectorXd z(post.Pi.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = std_normal(rng);
  const MatrixXd L = llt.matrixL();
  return post.Pi + L.transpose().triangularView<Eigen::Upper>().solve(z);
}

VectorXd transform_dev_factors(const VectorXd& x, const std::vector<MatrixXd>& blocks) {
  VectorXd out(x.size());
  Eigen::Index off = 0;
  for (const auto& B : blocks) {
    if (!is_spd(B)) throw Error(ErrorKind::SingularTransform, "transform block not SPD");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(B);
    out.segment(off, B.rows()) =
        es.eigenvalues().cwiseSqrt().asDiagonal() * (es.eigenvectors() * x.segment(off, B.rows()));
    off += B.rows();
  }
  if (off != x.size()) throw Error(ErrorKind::LengthMismatch, "transform blocks do not cover vector");
  return out;
}

VectorXd untransform_dev_factors(const VectorXd& tilde, const std::vector<MatrixXd>& blocks) {
  VectorXd out(tilde.size());
  Eigen::Index off = 0;
  for (const auto& B : blocks) {
    if (!is_spd(B)) throw Error(ErrorKind::SingularTransform, "transform block not SPD");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(B);
    out.segment(off, B.rows()) =
        es.eigenvectors().transpose() * (es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                         tilde.segment(off, B.rows()));
    off += B.rows();
  }
  if (off != tilde.size()) throw Error(ErrorKind::LengthMismatch, "transform blocks do not cover vector");
  return out;
}

std::vector<MatrixXd> transform_blocks(const DependenceSpec& dep, const DevelopmentFactors& theta) {
  if (std::holds_alternative<ModelISpec>(dep)) {
    VectorXd v(theta.sigma.size() + theta.tau.size());
    v << theta.sigma.array().square().matrix(), theta.tau.array().square().matrix();
    return {MatrixXd(v.asDiagonal())};
  }
  if (const auto* m2 = std::get_if<ModelIISpec>(&dep)) {
    if (!m2->per_year.empty()) return m2->per_year;
    return {m2->Sigma};
  }
  if (const auto* m3 = std::get_if<ModelIIISpec>(&dep)) return m3->tele.blocks();
  const auto& m4 = std::get<ModelIVSpec>(dep);
  return {MatrixXd(m4.Sigma_diag.asDiagonal())};
}

VectorXd untransform_dev_factors(const VectorXd& tilde, const DependenceSpec& dep, const DevelopmentFactors& theta) {
  return untransform_dev_factors(tilde, transform_blocks(dep, theta));
}

InverseWishartParams covariance_full_conditional(const MatrixXd& residuals, const InverseWishartParams& prior) {
  if (residuals.rows() != prior.Lambda.rows())
    throw Error(ErrorKind::DimMismatch, "residual rows do not match prior dimension");
  InverseWishartParams post;
  post.Lambda = prior.Lambda + residuals * residuals.transpose();
  post.Lambda = 0.5 * (post.Lambda + post.Lambda.transpose());
  post.k = prior.k + static_cast<double>(residuals.cols());
  require_spd(post.Lambda, "posterior inverse-Wishart scale");
  return post;
}

std::vector<InverseWishartParams> covariance_full_conditional_blocks(
    const MatrixXd& residuals, const std::vector<InverseWishartParams>& priors) {
  std::vector<InverseWishartParams> out;
  Eigen::Index off = 0;
  for (const auto& p : priors) {
    out.push_back(covariance_full_conditional(residuals.middleRows(off, p.Lambda.rows()), p));
    off += p.Lambda.rows();
  }
  if (off != residuals.rows()) throw Error(ErrorKind::DimMismatch, "blocks do not cover residual rows");
  return out;
}

InverseGammaParams hyper_variance_full_conditional(double value, double prior_mean, double alpha, double beta) {
  const double r = value - prior_mean;
  return {alpha + 0.5, beta + 0.5 * r * r};
}

}  // namespace picres
