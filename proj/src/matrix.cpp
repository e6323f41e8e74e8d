#include "picres/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "picres/errors.hpp"

namespace picres {

namespace {

bool cholesky_ok(const MatrixXd& S, Eigen::LLT<MatrixXd>* out) {
  const double n = static_cast<double>(S.rows());
  const double tol = 1e-10 * std::max(S.trace(), 0.0) / n;
  Eigen::LLT<MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) return false;
  const MatrixXd L = llt.matrixL();
  for (Eigen::Index i = 0; i < S.rows(); ++i) {
    double d = L(i, i) * L(i, i);
    if (!(d > tol) || !std::isfinite(d)) return false;
  }
  if (out) *out = llt;
  return true;
}

}  // namespace

bool is_spd(const MatrixXd& S) {
  if (S.rows() == 0 || S.rows() != S.cols() || !S.allFinite()) return false;
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, S.cwiseAbs().maxCoeff()))
    return false;
  return cholesky_ok(S, nullptr);
}

void require_spd(const MatrixXd& S, const char* what) {
  if (!is_spd(S)) throw Error(ErrorKind::NotSPD, std::string(what) + " is not symmetric positive definite");
}

double log_det_spd(const MatrixXd& S) {
  Eigen::LLT<MatrixXd> llt;
  if (!cholesky_ok(S, &llt)) throw Error(ErrorKind::NotSPD, "log-determinant of non-SPD matrix");
  const MatrixXd L = llt.matrixL();
  return 2.0 * L.diagonal().array().log().sum();
}

MatrixXd direct_sum(const std::vector<MatrixXd>& blocks) {
  if (blocks.empty()) throw Error(ErrorKind::EmptyList, "direct_sum needs at least one block");
  Eigen::Index n = 0;
  for (const auto& b : blocks) n += b.rows();
  MatrixXd out = MatrixXd::Zero(n, n);
  Eigen::Index off = 0;
  for (const auto& b : blocks) {
    out.block(off, off, b.rows(), b.cols()) = b;
    off += b.rows();
  }
  return out;
}

MatrixXd kronecker(const MatrixXd& A, const MatrixXd& B) {
  MatrixXd out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

Whitening spectral_whiten(const MatrixXd& S) {
  require_spd(S, "whitening covariance");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NotSPD, "eigendecomposition failed");
  const VectorXd lam = es.eigenvalues();
  const double tol = 1e-14 * lam.cwiseAbs().maxCoeff();
  if (lam.minCoeff() <= tol) throw Error(ErrorKind::NotSPD, "eigenvalue at or below tolerance");
  Whitening w;
  w.eigenvalues = lam;
  w.eigenvectors = es.eigenvectors();
  w.transform = lam.array().rsqrt().matrix().asDiagonal() * es.eigenvectors().transpose();
  w.inverse_transform = es.eigenvectors() * lam.array().sqrt().matrix().asDiagonal();
  return w;
}

GaussianConditional gaussian_condition(const VectorXd& mu, const MatrixXd& S,
                                       const std::vector<int>& observed_idx,
                                       const VectorXd& observed_vals) {
  const int n = static_cast<int>(mu.size());
  if (S.rows() != n || S.cols() != n || static_cast<Eigen::Index>(observed_idx.size()) != observed_vals.size())
    throw Error(ErrorKind::DimMismatch, "gaussian_condition dimensions inconsistent");
  std::vector<char> is_obs(n, 0);
  for (int k : observed_idx) {
    if (k < 0 || k >= n || is_obs[k]) throw Error(ErrorKind::DimMismatch, "bad observed index");
    is_obs[k] = 1;
  }
  GaussianConditional out;
  for (int k = 0; k < n; ++k)
    if (!is_obs[k]) out.free_idx.push_back(k);
  const int nf = static_cast<int>(out.free_idx.size());
  const int no = static_cast<int>(observed_idx.size());
  VectorXd mu1(nf), mu2(no);
  MatrixXd S11(nf, nf), S12(nf, no), S22(no, no);
  for (int a = 0; a < nf; ++a) {
    mu1(a) = mu(out.free_idx[a]);
    for (int b = 0; b < nf; ++b) S11(a, b) = S(out.free_idx[a], out.free_idx[b]);
    for (int b = 0; b < no; ++b) S12(a, b) = S(out.free_idx[a], observed_idx[b]);
  }
  for (int a = 0; a < no; ++a) {
    mu2(a) = mu(observed_idx[a]);
    for (int b = 0; b < no; ++b) S22(a, b) = S(observed_idx[a], observed_idx[b]);
  }
  if (no == 0) {
    out.mean = mu1;
    out.cov = S11;
    return out;
  }
  Eigen::LLT<MatrixXd> llt;
  if (!cholesky_ok(S22, &llt)) throw Error(ErrorKind::SingularObservedBlock, "observed block not invertible");
  const MatrixXd K = llt.solve(S12.transpose()).transpose();
  out.mean = mu1 + K * (observed_vals - mu2);
  MatrixXd C = S11 - K * S12.transpose();
  C = 0.5 * (C + C.transpose());
  if (nf > 0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(C);
    VectorXd lam = es.eigenvalues();
    const double tol = 1e-10 * std::max(1.0, S11.diagonal().cwiseAbs().maxCoeff());
    bool clamp = false;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
      if (lam(i) < tol) {
        lam(i) = std::max(lam(i), 0.0);
        clamp = true;
      }
    if (clamp) {
      C = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
      C = 0.5 * (C + C.transpose());
    }
  }
  out.cov = C;
  return out;
}

double mvn_logpdf(const VectorXd& x, const VectorXd& mu, const MatrixXd& S) {
  if (x.size() != mu.size() || S.rows() != x.size())
    throw Error(ErrorKind::DimMismatch, "mvn_logpdf dimensions inconsistent");
  if (x.size() == 0) return 0.0;
  Eigen::LLT<MatrixXd> llt;
  if (!cholesky_ok(S, &llt)) throw Error(ErrorKind::NotSPD, "Gaussian covariance is not SPD");
  const MatrixXd L = llt.matrixL();
  const VectorXd z = L.triangularView<Eigen::Lower>().solve(x - mu);
  return -0.5 * static_cast<double>(x.size()) * kLog2Pi - L.diagonal().array().log().sum() - 0.5 * z.squaredNorm();
}

VectorXd mvn_sample_psd(const VectorXd& mu, const MatrixXd& S, Rng& rng) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
  VectorXd z(mu.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = std_normal(rng);
  const VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return mu + es.eigenvectors() * root.cwiseProduct(z);
}

double matrix_normal_logpdf(const MatrixXd& X, const MatrixXd& M, const MatrixXd& Sigma,
                            const MatrixXd& Psi) {
  const double p = static_cast<double>(X.rows());
  const double n = static_cast<double>(X.cols());
  if (M.rows() != X.rows() || M.cols() != X.cols() || Sigma.rows() != X.rows() || Psi.rows() != X.cols())
    throw Error(ErrorKind::DimMismatch, "matrix-normal dimensions inconsistent");
  require_spd(Sigma, "row covariance");
  require_spd(Psi, "column covariance");
  const MatrixXd D = X - M;
  const MatrixXd SinvD = Sigma.llt().solve(D);
  const MatrixXd PinvDt = Psi.llt().solve(D.transpose());
  const double quad = (PinvDt * SinvD).trace();
  return -0.5 * n * p * kLog2Pi - 0.5 * n * log_det_spd(Sigma) - 0.5 * p * log_det_spd(Psi) - 0.5 * quad;
}

double log_multivariate_gamma(double a, int p) {
  double out = 0.25 * p * (p - 1) * std::log(M_PI);
  for (int j = 1; j <= p; ++j) out += std::lgamma(a + 0.5 * (1 - j));
  return out;
}

double inverse_wishart_logpdf(const MatrixXd& S, const InverseWishartParams& params) {
  const int p = static_cast<int>(params.Lambda.rows());
  if (!(params.k > p - 1)) throw Error(ErrorKind::InvalidDof, "inverse-Wishart dof must exceed p-1");
  require_spd(S, "inverse-Wishart argument");
  require_spd(params.Lambda, "inverse-Wishart scale");
  const double k = params.k;
  const double tr = S.llt().solve(params.Lambda).trace();
  return 0.5 * k * log_det_spd(params.Lambda) - 0.5 * (k + p + 1) * log_det_spd(S) - 0.5 * tr -
         0.5 * k * p * std::log(2.0) - log_multivariate_gamma(0.5 * k, p);
}

MatrixXd inverse_wishart_sample(const InverseWishartParams& params, Rng& rng) {
  const int p = static_cast<int>(params.Lambda.rows());
  if (!(params.k > p - 1)) throw Error(ErrorKind::InvalidDof, "inverse-Wishart dof must exceed p-1");
  require_spd(params.Lambda, "inverse-Wishart scale");
  // Bartlett: W = L A A^T L^T ~ Wishart(Lambda^{-1}, k), Sigma = W^{-1}.
  const MatrixXd Linv = params.Lambda.inverse();
  const MatrixXd L = Linv.llt().matrixL();
  MatrixXd A = MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    A(i, i) = std::sqrt(2.0 * gamma_draw(0.5 * (params.k - i), rng));
    for (int j = 0; j < i; ++j) A(i, j) = std_normal(rng);
  }
  const MatrixXd LA = L * A;
  // Sigma = (LA)^{-T} (LA)^{-1}
  const MatrixXd inv = LA.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(p, p));
  MatrixXd out = inv.transpose() * inv;
  return 0.5 * (out + out.transpose());
}

MatrixXd inverse_wishart_mean(const InverseWishartParams& params) {
  const int p = static_cast<int>(params.Lambda.rows());
  if (!(params.k > p + 1)) throw Error(ErrorKind::InvalidDof, "inverse-Wishart mean needs k > p+1");
  return params.Lambda / (params.k - p - 1);
}

}  // namespace picres
