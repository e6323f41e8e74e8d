#include "picres/reserving.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "picres/errors.hpp"

namespace picres {

namespace {

// Samples the full ratio vectors given the observed functionals; years stacked accident-major.
VectorXd condition_ratios(const SamplerContext& ctx, const ChainState& s, Rng& rng) {
  const int J = ctx.tri.J();
  const int dim = 2 * J + 1;
  const auto& om = ctx.om;
  const VectorXd beta = s.params.theta.beta();
  MatrixXd L = MatrixXd::Zero(om.y.size(), (J + 1) * dim);
  VectorXd mu((J + 1) * dim);
  for (int i = 0; i <= J; ++i) {
    const int off = om.year_offset[i];
    const int n = om.year_offset[i + 1] - off;
    L.block(off, i * dim, n, dim) = om.design.middleRows(off, n);
    mu.segment(i * dim, dim) = beta;
  }
  auto condition = [&](const VectorXd& m, const MatrixXd& C, const MatrixXd& Lb, const VectorXd& y) {
    const Eigen::Index p = m.size(), q = y.size();
    VectorXd jm(p + q);
    jm << m, Lb * m;
    MatrixXd JS(p + q, p + q);
    JS << C, C * Lb.transpose(), Lb * C, Lb * C * Lb.transpose();
    std::vector<int> obs(q);
    for (Eigen::Index k = 0; k < q; ++k) obs[k] = static_cast<int>(p + k);
    const GaussianConditional g = gaussian_condition(jm, JS, obs, y);
    return mvn_sample_psd(g.mean, g.cov, rng);
  };
  if (!years_independent(s.params.dep))
    return condition(mu, ratio_covariance_full(J, s.params.dep, s.params.theta), L, om.y);
  VectorXd out((J + 1) * dim);
  for (int i = 0; i <= J; ++i) {
    const int off = om.year_offset[i];
    const int n = om.year_offset[i + 1] - off;
    out.segment(i * dim, dim) = condition(beta, ratio_covariance_year(J, i, s.params.dep, s.params.theta),
                                          om.design.middleRows(off, n), om.y.segment(off, n));
  }
  return out;
}

}  // namespace

VectorXd predictive_ultimate_one(const SamplerContext& ctx, const ChainState& s, Rng& rng) {
  const int J = ctx.tri.J();
  VectorXd u(J + 1);
  u(0) = ctx.tri.P(0, J);
  if (ctx.model.kind == ModelKind::IV) {
    for (int i = 1; i <= J; ++i) u(i) = std::exp(s.levels(i, J));
    return u;
  }
  const VectorXd xi = condition_ratios(ctx, s, rng);
  const int dim = 2 * J + 1;
  for (int i = 1; i <= J; ++i) {
    double lp = std::log(ctx.tri.P(i, J - i));
    for (int m = J - i + 1; m <= J; ++m) lp += xi(i * dim + m);
    u(i) = std::exp(lp);
  }
  return u;
}

MatrixXd predictive_ultimate_serial(const SamplerContext& ctx, const std::vector<ChainState>& draws,
                                    std::uint64_t seed) {
  MatrixXd out(draws.size(), ctx.tri.J() + 1);
  for (std::size_t d = 0; d < draws.size(); ++d) {
    Rng rng = make_rng(seed, d);
    out.row(d) = predictive_ultimate_one(ctx, draws[d], rng).transpose();
  }
  return out;
}

MatrixXd predictive_ultimate(const SamplerContext& ctx, const std::vector<ChainState>& draws, std::uint64_t seed) {
  MatrixXd out(draws.size(), ctx.tri.J() + 1);
  const long n = static_cast<long>(draws.size());
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 64)
  for (long d = 0; d < n; ++d) {
    try {
      Rng rng = make_rng(seed, static_cast<std::uint64_t>(d));
      out.row(d) = predictive_ultimate_one(ctx, draws[d], rng).transpose();
    } catch (...) {
#pragma omp critical
      err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

double sample_quantile(std::vector<double> x, double p) {
  if (x.empty()) throw Error(ErrorKind::EmptyList, "quantile of empty sample");
  std::sort(x.begin(), x.end());
  const double h = (static_cast<double>(x.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

QuantileSummary summarize(const VectorXd& x) {
  QuantileSummary s;
  const std::vector<double> v(x.data(), x.data() + x.size());
  s.mean = x.mean();
  s.sd = x.size() > 1 ? std::sqrt((x.array() - s.mean).square().sum() / (x.size() - 1.0)) : 0.0;
  s.q05 = sample_quantile(v, 0.05);
  s.q25 = sample_quantile(v, 0.25);
  s.q50 = sample_quantile(v, 0.50);
  s.q75 = sample_quantile(v, 0.75);
  s.q95 = sample_quantile(v, 0.95);
  return s;
}

ReserveSummary reserve_distribution(const MatrixXd& ultimates, const ClaimsTriangle& tri) {
  const int J = tri.J();
  if (ultimates.cols() != J + 1) throw Error(ErrorKind::DimMismatch, "ultimates must have J+1 columns");
  ReserveSummary r;
  r.samples.resize(ultimates.rows(), J + 1);
  for (int i = 0; i <= J; ++i)
    r.samples.col(i) = i == 0 ? VectorXd::Zero(ultimates.rows()) : VectorXd(ultimates.col(i).array() - tri.P(i, J - i));
  r.total_samples = r.samples.rowwise().sum();
  for (int i = 0; i <= J; ++i) r.per_accident.push_back(summarize(r.samples.col(i)));
  r.total = summarize(r.total_samples);
  return r;
}

namespace {

void summary_line(std::string& out, const std::string& key, const QuantileSummary& s) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", key.c_str(), s.mean, s.sd, s.q05,
                s.q25, s.q50, s.q75, s.q95);
  out += buf;
}

}  // namespace

std::string reserve_csv(const ReserveSummary& r) {
  std::string out = "accident_year,mean,sd,q05,q25,q50,q75,q95\n";
  for (std::size_t i = 0; i < r.per_accident.size(); ++i) summary_line(out, std::to_string(i), r.per_accident[i]);
  summary_line(out, "total", r.total);
  return out;
}

std::vector<HistogramBin> histogram(const VectorXd& x, int bins) {
  if (bins < 1) throw Error(ErrorKind::ConfigError, "histogram needs at least one bin");
  if (x.size() == 0) throw Error(ErrorKind::EmptyList, "histogram of empty sample");
  double lo = x.minCoeff(), hi = x.maxCoeff();
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double w = (hi - lo) / bins;
  std::vector<HistogramBin> h(bins);
  for (int b = 0; b < bins; ++b) h[b] = {lo + b * w, b + 1 == bins ? hi : lo + (b + 1) * w, 0};
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const int b = std::clamp(static_cast<int>((x(k) - lo) / w), 0, bins - 1);
    ++h[b].count;
  }
  return h;
}

std::string histogram_csv(const std::vector<HistogramBin>& h) {
  std::string out = "bin_left,bin_right,count\n";
  char buf[256];
  for (const auto& b : h) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%ld\n", b.left, b.right, b.count);
    out += buf;
  }
  return out;
}

std::pair<double, VectorXd> principal_eigen(const MatrixXd& S) {
  require_spd(S, "covariance draw");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
  const Eigen::Index k = S.rows() - 1;
  VectorXd v = es.eigenvectors().col(k);
  for (Eigen::Index j = 0; j < v.size(); ++j)
    if (std::abs(v(j)) > 1e-12) {
      if (v(j) < 0) v = -v;
      break;
    }
  return {es.eigenvalues()(k), v};
}

std::vector<BlockEigen> posterior_cov_eigen_summary(const std::vector<std::vector<MatrixXd>>& draws) {
  std::vector<BlockEigen> out;
  for (const auto& block : draws) {
    if (block.empty()) throw Error(ErrorKind::EmptyList, "block has no draws");
    VectorXd lam(block.size());
    VectorXd vsum = VectorXd::Zero(block[0].rows());
    for (std::size_t s = 0; s < block.size(); ++s) {
      const auto [l, v] = principal_eigen(block[s]);
      lam(s) = l;
      vsum += v;
    }
    const QuantileSummary q = summarize(lam);
    BlockEigen be;
    be.mean = q.mean;
    be.sd = q.sd;
    be.q05 = q.q05;
    be.q95 = q.q95;
    be.vector = vsum.norm() > 0 ? VectorXd(vsum / vsum.norm()) : vsum;
    out.push_back(be);
  }
  return out;
}

std::string eigen_csv(const std::vector<BlockEigen>& e) {
  std::string out = "block,mean_lambda,sd_lambda,q05,q95,eigenvector\n";
  char buf[256];
  for (std::size_t b = 0; b < e.size(); ++b) {
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g,%.10g,", b, e[b].mean, e[b].sd, e[b].q05, e[b].q95);
    out += buf;
    for (Eigen::Index k = 0; k < e[b].vector.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%s%.10g", k ? " " : "", e[b].vector(k));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace picres
