#include "picres/samplers.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <map>

#include "picres/errors.hpp"

namespace picres {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

VectorXd prior_mean(const HyperPriors& h) {
  VectorXd m(h.phi_mean.size() + h.psi_mean.size());
  m << h.phi_mean, h.psi_mean;
  return m;
}

VectorXd prior_var(const ChainState& s) {
  VectorXd v(s.params.s2.size() + s.params.t2.size());
  v << s.params.s2, s.params.t2;
  return v;
}

// Draw Xi ~ N(mu, C) conditioned on L Xi = y.
VectorXd impute_linear(const VectorXd& mu, const MatrixXd& C, const MatrixXd& L, const VectorXd& y, Rng& rng) {
  const MatrixXd S = L * C * L.transpose();
  Eigen::LDLT<MatrixXd> ldlt(S);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorKind::SingularObservedBlock, "observation covariance");
  const MatrixXd K = ldlt.solve(L * C).transpose();
  const VectorXd mean = mu + K * (y - L * mu);
  MatrixXd cov = C - K * L * C;
  cov = 0.5 * (cov + cov.transpose());
  return mvn_sample_psd(mean, cov, rng);
}

std::vector<MatrixXd>& covariance_blocks(DependenceSpec& dep, std::vector<MatrixXd>& scratch) {
  scratch.clear();
  if (auto* m2 = std::get_if<ModelIISpec>(&dep)) {
    if (!m2->per_year.empty()) return m2->per_year;
    scratch.push_back(m2->Sigma);
    return scratch;
  }
  if (auto* m3 = std::get_if<ModelIIISpec>(&dep)) {
    scratch = m3->tele.blocks();
    return scratch;
  }
  return scratch;
}

std::vector<MatrixXd> covariance_blocks(const DependenceSpec& dep) {
  DependenceSpec copy = dep;
  std::vector<MatrixXd> scratch;
  return covariance_blocks(copy, scratch);
}

void set_covariance_block(DependenceSpec& dep, std::size_t b, const MatrixXd& B) {
  if (auto* m2 = std::get_if<ModelIISpec>(&dep)) {
    if (m2->per_year.empty())
      m2->Sigma = B;
    else
      m2->per_year.at(b) = B;
    return;
  }
  auto& tele = std::get<ModelIIISpec>(dep).tele;
  if (b < tele.payment_blocks.size())
    tele.payment_blocks[b] = B;
  else
    tele.incurred_blocks.at(b - tele.payment_blocks.size()) = B;
}

std::vector<int> aux_columns(int J, int i) {
  std::vector<int> cols;
  for (int c = 0; c <= 2 * J; ++c)
    if (!level_observed(J, i, c)) cols.push_back(c);
  return cols;
}

double level_prior_var(const ChainState& s, int c) {
  const int J = s.params.theta.J();
  return c <= J ? s.params.s2(c) : s.params.t2(c - J - 1);
}

double copula_total(const MatrixXd& levels, const VectorXd& beta, const ModelIVSpec& spec) {
  double out = 0.0;
  for (Eigen::Index i = 0; i < levels.rows(); ++i)
    out += copula_year_logdensity(levels, static_cast<int>(i), beta, spec);
  return out;
}

VectorXd copula_params(const ModelIVSpec& spec) {
  VectorXd r(spec.mix_P.size() + spec.mix_I.size());
  Eigen::Index k = 0;
  for (const auto& [w, p] : spec.mix_P.components()) r(k++) = p.rho;
  for (const auto& [w, p] : spec.mix_I.components()) r(k++) = p.rho;
  return r;
}

// Blocks configured as independence are held fixed by the sampler.
VectorXd free_copula_params(const ModelIVSpec& spec, const ModelIVSpec& configured) {
  std::vector<double> r;
  if (!configured.mix_P.is_independence())
    for (const auto& [w, p] : spec.mix_P.components()) r.push_back(p.rho);
  if (!configured.mix_I.is_independence())
    for (const auto& [w, p] : spec.mix_I.components()) r.push_back(p.rho);
  return Eigen::Map<const VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
}

void set_free_copula_params(ModelIVSpec& spec, const ModelIVSpec& configured, const VectorXd& r) {
  Eigen::Index k = 0;
  if (!configured.mix_P.is_independence())
    for (auto& c : spec.mix_P.components()) c.second.rho = r(k++);
  if (!configured.mix_I.is_independence())
    for (auto& c : spec.mix_I.components()) c.second.rho = r(k++);
}

double copula_target(const ModelIVSpec& spec, const MatrixXd& levels, const VectorXd& beta, const HyperPriors& h) {
  const int J = static_cast<int>(levels.rows()) - 1;
  for (const auto* mix : {&spec.mix_P, &spec.mix_I}) {
    const int d = mix == &spec.mix_P ? J + 1 : J;
    for (const auto& [w, p] : mix->components()) {
      if (!(p.rho >= h.copula.lo(p.family) && p.rho <= h.copula.hi(p.family))) return kNegInf;
      try {
        check_domain(p, std::max(d, 2));
      } catch (const Error&) {
        return kNegInf;
      }
    }
  }
  try {
    return copula_total(levels, beta, spec);
  } catch (const Error&) {
    return kNegInf;
  }
}

void draw_hyper(ChainState& s, const HyperPriors& h, Rng& rng) {
  const auto& th = s.params.theta;
  for (Eigen::Index j = 0; j < th.phi.size(); ++j) {
    const auto ig = hyper_variance_full_conditional(th.phi(j), h.phi_mean(j), h.alpha_s(j), h.beta_s(j));
    s.params.s2(j) = inverse_gamma_draw(ig.shape, ig.scale, rng);
  }
  for (Eigen::Index j = 0; j < th.psi.size(); ++j) {
    const auto ig = hyper_variance_full_conditional(th.psi(j), h.psi_mean(j), h.alpha_t(j), h.beta_t(j));
    s.params.t2(j) = inverse_gamma_draw(ig.shape, ig.scale, rng);
  }
}

// sigma_j^2 and tau_j^2 for Model I: IG proposal from the ratio term, corrected by the full target.
void model_one_scales(ChainState& s, AdaptiveState& adapt, const SamplerContext& ctx, Rng& rng) {
  const auto& h = ctx.model.hyper;
  const int J = ctx.tri.J();
  const LogDevelopmentRatios lr = log_ratios(ctx.tri);
  auto target = [&](const ChainState& st) {
    return loglik_independent(ctx.tri, st.params.theta) + log_prior(st.params, h);
  };
  auto step = [&](double& slot, double shape, double scale) {
    const double old = slot;
    const double old_target = target(s);
    const double prop = inverse_gamma_draw(shape, scale, rng);
    slot = std::sqrt(prop);
    const double new_target = target(s);
    const double q_fwd = inverse_gamma_logpdf(prop, shape, scale);
    const double q_bwd = inverse_gamma_logpdf(old * old, shape, scale);
    const bool acc = mh_accept(new_target, old_target, q_fwd, q_bwd, rng);
    if (!acc) slot = old;
    adapt.scale_rate.record(acc);
  };
  for (int j = 0; j <= J; ++j) {
    double ss = 0.0;
    for (int i = 0; i <= J - j; ++i) ss += std::pow(lr.xi(i, j) - s.params.theta.phi(j), 2);
    step(s.params.theta.sigma(j), h.scale_alpha + 0.5 * (J - j + 1), h.scale_beta + 0.5 * ss);
  }
  for (int j = 0; j < J; ++j) {
    double ss = 0.0;
    for (int i = 0; i < J - j; ++i) ss += std::pow(-lr.zeta(i, j) - s.params.theta.psi(j), 2);
    step(s.params.theta.tau(j), h.scale_alpha + 0.5 * (J - j), h.scale_beta + 0.5 * ss);
  }
}

// Model II: impute the unobserved ratios, then draw Sigma from its inverse-Wishart conditional.
void model_two_covariance(ChainState& s, const SamplerContext& ctx, Rng& rng) {
  auto& m2 = std::get<ModelIISpec>(s.params.dep);
  const int J = ctx.tri.J();
  const int dim = 2 * J + 1;
  const VectorXd beta = s.params.theta.beta();
  MatrixXd E(dim, J + 1);
  if (years_independent(s.params.dep)) {
    for (int i = 0; i <= J; ++i) {
      const int off = ctx.om.year_offset[i];
      const int n = ctx.om.year_offset[i + 1] - off;
      const MatrixXd C = ratio_covariance_year(J, i, s.params.dep, s.params.theta);
      E.col(i) = impute_linear(beta, C, ctx.om.design.middleRows(off, n), ctx.om.y.segment(off, n), rng) - beta;
    }
  } else {
    MatrixXd L = MatrixXd::Zero(ctx.om.y.size(), (J + 1) * dim);
    VectorXd mu((J + 1) * dim);
    for (int i = 0; i <= J; ++i) {
      const int off = ctx.om.year_offset[i];
      const int n = ctx.om.year_offset[i + 1] - off;
      L.block(off, i * dim, n, dim) = ctx.om.design.middleRows(off, n);
      mu.segment(i * dim, dim) = beta;
    }
    const VectorXd xi = impute_linear(mu, ratio_covariance_full(J, s.params.dep, s.params.theta), L, ctx.om.y, rng);
    for (int i = 0; i <= J; ++i) E.col(i) = xi.segment(i * dim, dim) - beta;
  }
  const auto prior = ctx.model.hyper.iw_prior(dim);
  if (!m2.per_year.empty()) {
    for (int i = 0; i <= J; ++i)
      m2.per_year[i] = inverse_wishart_sample(covariance_full_conditional(E.col(i), prior), rng);
    return;
  }
  MatrixXd EO = E;
  if (m2.Omega.size() != 0) EO = E * m2.Omega.llt().solve(MatrixXd::Identity(J + 1, J + 1));
  InverseWishartParams post{prior.Lambda + EO * E.transpose(), prior.k + (J + 1)};
  post.Lambda = 0.5 * (post.Lambda + post.Lambda.transpose());
  m2.Sigma = inverse_wishart_sample(post, rng);
}

// Model III: per-block manifold moves against the observed-data likelihood.
void model_three_covariance(ChainState& s, AdaptiveState& adapt, const SamplerContext& ctx, Rng& rng) {
  const auto blocks = covariance_blocks(s.params.dep);
  const auto& h = ctx.model.hyper;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const MatrixXd& cur = blocks[b];
    const int d = static_cast<int>(cur.rows());
    const auto prior = h.iw_prior(d);
    const bool adaptive = adapt.iw_count >= ctx.am.warmup_for(d);
    const MatrixXd hist = adapt.iw_count > 0 ? MatrixXd(adapt.iw_sum[b] / adapt.iw_count) : prior.Lambda;
    const IWProposal prop = manifold_iw_propose(cur, hist, prior.Lambda, ctx.am, rng, adaptive);
    const double old_target = loglik_gaussian(ctx.om, s.params.theta, s.params.dep) + inverse_wishart_logpdf(cur, prior);
    DependenceSpec dep_new = s.params.dep;
    set_covariance_block(dep_new, b, prop.proposal);
    double new_target = kNegInf;
    try {
      new_target = loglik_gaussian(ctx.om, s.params.theta, dep_new) + inverse_wishart_logpdf(prop.proposal, prior);
    } catch (const Error&) {
    }
    const bool acc = mh_accept(new_target, old_target, prop.log_q_forward, prop.log_q_backward, rng);
    if (acc) s.params.dep = std::move(dep_new);
    adapt.cov_rate.record(acc);
  }
  if (adapt.adapting) {
    const auto now = covariance_blocks(s.params.dep);
    for (std::size_t b = 0; b < now.size(); ++b) adapt.iw_sum[b] += now[b];
    ++adapt.iw_count;
  }
}

// Model IV Stage 1: componentwise conjugate complete-data proposals with copula correction.
void model_four_stage_one(ChainState& s, AdaptiveState& adapt, const SamplerContext& ctx, Rng& rng) {
  auto& spec = std::get<ModelIVSpec>(s.params.dep);
  const int J = ctx.tri.J();
  const VectorXd pm = prior_mean(ctx.model.hyper);
  const bool indep = spec.mix_P.is_independence() && spec.mix_I.is_independence();
  VectorXd beta = s.params.theta.beta();
  double cop_old = indep ? 0.0 : copula_total(s.levels, beta, spec);
  for (int c = 0; c <= 2 * J; ++c) {
    const double v = level_prior_var(s, c);
    const double Sc = spec.Sigma_diag(c);
    const double prec = 1.0 / v + (J + 1) / Sc;
    const double mean = (pm(c) / v + s.levels.col(c).sum() / Sc) / prec;
    const double old = beta(c);
    beta(c) = mean + std_normal(rng) / std::sqrt(prec);
    const double cop_new = indep ? 0.0 : copula_total(s.levels, beta, spec);
    const bool acc = mh_accept(cop_new, cop_old, 0.0, 0.0, rng);
    if (acc)
      cop_old = cop_new;
    else
      beta(c) = old;
    adapt.dev_rate.record(acc);
  }
  s.params.theta.set_beta(beta);
  if (ctx.model.sample_hyper) draw_hyper(s, ctx.model.hyper, rng);
  if (!ctx.model.sample_scales) return;
  const auto& h = ctx.model.hyper;
  for (int c = 0; c <= 2 * J; ++c) {
    const double shape = h.scale_alpha + 0.5 * (J + 1);
    const double scale = h.scale_beta + 0.5 * (s.levels.col(c).array() - beta(c)).square().sum();
    const double old = spec.Sigma_diag(c);
    spec.Sigma_diag(c) = inverse_gamma_draw(shape, scale, rng);
    const double cop_new = indep ? 0.0 : copula_total(s.levels, beta, spec);
    const bool acc = mh_accept(cop_new, cop_old, 0.0, 0.0, rng);
    if (acc)
      cop_old = cop_new;
    else
      spec.Sigma_diag(c) = old;
    adapt.scale_rate.record(acc);
  }
}

void model_four_copula(ChainState& s, AdaptiveState& adapt, const SamplerContext& ctx, Rng& rng) {
  auto& spec = std::get<ModelIVSpec>(s.params.dep);
  const VectorXd beta = s.params.theta.beta();
  const auto& configured = std::get<ModelIVSpec>(ctx.model.dep);
  const VectorXd cur = free_copula_params(spec, configured);
  if (cur.size() == 0) return;
  const VectorXd prop = euclidean_am_propose(cur, adapt.copula, ctx.am, rng);
  const double old_target = copula_target(spec, s.levels, beta, ctx.model.hyper);
  ModelIVSpec trial = spec;
  set_free_copula_params(trial, configured, prop);
  const double new_target = copula_target(trial, s.levels, beta, ctx.model.hyper);
  const bool acc = mh_accept(new_target, old_target, 0.0, 0.0, rng);
  if (acc) spec = std::move(trial);
  adapt.copula_rate.record(acc);
  if (adapt.adapting) adapt.copula.update(free_copula_params(spec, configured));
}

}  // namespace

const char* model_name(ModelKind k) {
  switch (k) {
    case ModelKind::I: return "I";
    case ModelKind::II: return "II";
    case ModelKind::III: return "III";
    case ModelKind::IV: return "IV";
  }
  return "?";
}

ModelKind parse_model(const std::string& s) {
  if (s == "I" || s == "1") return ModelKind::I;
  if (s == "II" || s == "2") return ModelKind::II;
  if (s == "III" || s == "3") return ModelKind::III;
  if (s == "IV" || s == "4") return ModelKind::IV;
  throw Error(ErrorKind::ConfigError, "unknown model '" + s + "'");
}

RunningMoments::RunningMoments(int dim) : mean(VectorXd::Zero(dim)), cov(MatrixXd::Zero(dim, dim)) {}

void RunningMoments::update(const VectorXd& x) {
  if (x.size() != mean.size()) throw Error(ErrorKind::DimMismatch, "running moments dimension mismatch");
  ++n;
  const VectorXd d = x - mean;
  mean += d / static_cast<double>(n);
  if (n >= 2) {
    const double nn = static_cast<double>(n);
    cov = ((nn - 2.0) / (nn - 1.0)) * cov + (d * d.transpose()) / nn;
  }
}

RunningMoments running_moments_update(RunningMoments rm, const VectorXd& x) {
  rm.update(x);
  return rm;
}

void AMConfig::validate() const {
  if (!(w1 > 0.0 && w1 < 1.0)) throw Error(ErrorKind::ConfigError, "am.w1 must lie in (0,1)");
  if (!(adapt_scale > 0.0 && fixed_scale > 0.0)) throw Error(ErrorKind::ConfigError, "am scales must be positive");
  if (warmup < 0) throw Error(ErrorKind::ConfigError, "am.warmup must be nonnegative");
  if (!(iw_dof_offset > 1.0)) throw Error(ErrorKind::InvalidDof, "am.iw_dof_offset must exceed 1");
}

namespace {

bool adaptive_factor(const RunningMoments& rm, const AMConfig& cfg, MatrixXd& L) {
  const int d = rm.dim();
  if (rm.n < cfg.warmup_for(d) || rm.n < 2) return false;
  const MatrixXd C = (cfg.adapt_scale * cfg.adapt_scale / d) * rm.cov;
  Eigen::LLT<MatrixXd> llt(C);
  if (llt.info() != Eigen::Success || !is_spd(C)) return false;
  L = llt.matrixL();
  return true;
}

}  // namespace

VectorXd euclidean_am_propose(const VectorXd& x, const RunningMoments& rm, const AMConfig& cfg, Rng& rng) {
  const int d = static_cast<int>(x.size());
  MatrixXd L;
  const bool adaptive = adaptive_factor(rm, cfg, L);
  const bool use_adaptive = adaptive && uniform01(rng) < cfg.w1;
  VectorXd z(d);
  for (int k = 0; k < d; ++k) z(k) = std_normal(rng);
  if (use_adaptive) return x + L * z;
  return x + (cfg.fixed_scale / std::sqrt(static_cast<double>(d))) * z;
}

double euclidean_am_logdensity(const VectorXd& from, const VectorXd& to, const RunningMoments& rm,
                               const AMConfig& cfg) {
  const int d = static_cast<int>(from.size());
  const MatrixXd fixed = (cfg.fixed_scale * cfg.fixed_scale / d) * MatrixXd::Identity(d, d);
  MatrixXd L;
  if (!adaptive_factor(rm, cfg, L)) return mvn_logpdf(to, from, fixed);
  const MatrixXd C = L * L.transpose();
  return log_sum_exp(std::log(cfg.w1) + mvn_logpdf(to, from, C),
                     std::log1p(-cfg.w1) + mvn_logpdf(to, from, fixed));
}

double manifold_iw_logdensity(const MatrixXd& S, const MatrixXd& history_mean, const MatrixXd& fixed_scale,
                              const AMConfig& cfg, bool adaptive) {
  const int d = static_cast<int>(S.rows());
  const double p = cfg.iw_dof(d);
  const double fixed = inverse_wishart_logpdf(S, {fixed_scale, p});
  if (!adaptive) return fixed;
  const double adapt = inverse_wishart_logpdf(S, {history_mean * (p - d - 1.0), p});
  return log_sum_exp(std::log(cfg.w1) + adapt, std::log1p(-cfg.w1) + fixed);
}

IWProposal manifold_iw_propose(const MatrixXd& current, const MatrixXd& history_mean, const MatrixXd& fixed_scale,
                               const AMConfig& cfg, Rng& rng, bool adaptive) {
  const int d = static_cast<int>(current.rows());
  const double p = cfg.iw_dof(d);
  if (!(p > d + 1.0)) throw Error(ErrorKind::InvalidDof, "proposal dof must exceed dim + 1");
  if (adaptive) require_spd(history_mean, "history mean");
  const bool use_adaptive = adaptive && uniform01(rng) < cfg.w1;
  const MatrixXd scale = use_adaptive ? MatrixXd(history_mean * (p - d - 1.0)) : fixed_scale;
  IWProposal out;
  out.proposal = inverse_wishart_sample({scale, p}, rng);
  out.log_q_forward = manifold_iw_logdensity(out.proposal, history_mean, fixed_scale, cfg, adaptive);
  out.log_q_backward = manifold_iw_logdensity(current, history_mean, fixed_scale, cfg, adaptive);
  return out;
}

bool mh_accept(double log_post_new, double log_post_old, double log_q_fwd, double log_q_bwd, Rng& rng) {
  if (std::isnan(log_post_new) || std::isnan(log_post_old) || std::isnan(log_q_fwd) || std::isnan(log_q_bwd))
    throw Error(ErrorKind::NaNInput, "NaN in acceptance ratio");
  if (log_post_new == kNegInf) return false;
  const double log_ratio = log_post_new - log_post_old + log_q_bwd - log_q_fwd;
  if (log_ratio >= 0.0) return true;
  return std::log(uniform01(rng)) < log_ratio;
}

SamplerContext::SamplerContext(const ClaimsTriangle& t, const ModelConfig& m, const AMConfig& a)
    : tri(t), model(m), am(a) {
  if (model.kind != ModelKind::IV) om = build_observation_model(tri);
  model.hyper.validate(tri.J());
  am.validate();
  const bool ok = (model.kind == ModelKind::I && std::holds_alternative<ModelISpec>(model.dep)) ||
                  (model.kind == ModelKind::II && std::holds_alternative<ModelIISpec>(model.dep)) ||
                  (model.kind == ModelKind::III && std::holds_alternative<ModelIIISpec>(model.dep)) ||
                  (model.kind == ModelKind::IV && std::holds_alternative<ModelIVSpec>(model.dep));
  if (!ok) throw Error(ErrorKind::ConfigError, "dependence structure does not match model kind");
  if (auto* m3 = std::get_if<ModelIIISpec>(&model.dep)) m3->tele.validate(tri.J());
}

double compute_log_posterior(const SamplerContext& ctx, const ChainState& s) {
  double ll = 0.0;
  switch (ctx.model.kind) {
    case ModelKind::I: ll = loglik_independent(ctx.tri, s.params.theta); break;
    case ModelKind::II:
    case ModelKind::III: ll = loglik_gaussian(ctx.om, s.params.theta, s.params.dep); break;
    case ModelKind::IV:
      ll = loglik_mixture_copula_full(s.levels, s.params.theta, std::get<ModelIVSpec>(s.params.dep)).total();
      break;
  }
  return ll + log_prior(s.params, ctx.model.hyper);
}

ChainState initial_state(const SamplerContext& ctx, double jitter, Rng& rng) {
  const int J = ctx.tri.J();
  ChainState s;
  s.params.theta = ctx.model.init;
  s.params.dep = ctx.model.dep;
  s.params.s2 = ctx.model.hyper.phi_var;
  s.params.t2 = ctx.model.hyper.psi_var;
  auto& th = s.params.theta;
  if (ctx.model.kind == ModelKind::IV) {
    s.levels = observed_levels(ctx.tri);
    VectorXd beta(2 * J + 1);
    for (int c = 0; c <= 2 * J; ++c) {
      double sum = 0.0;
      int n = 0;
      for (int i = 0; i <= J; ++i)
        if (level_observed(J, i, c)) sum += s.levels(i, c), ++n;
      beta(c) = sum / n + jitter * std_normal(rng);
    }
    th.set_beta(beta);
    for (int i = 0; i <= J; ++i)
      for (int c : aux_columns(J, i)) s.levels(i, c) = beta(c);
  } else {
    const LogDevelopmentRatios lr = log_ratios(ctx.tri);
    for (int j = 0; j <= J; ++j) th.phi(j) = lr.xi.col(j).head(J - j + 1).mean() + jitter * std_normal(rng);
    for (int j = 0; j < J; ++j) th.psi(j) = -lr.zeta.col(j).head(J - j).mean() + jitter * std_normal(rng);
  }
  s.log_posterior = compute_log_posterior(ctx, s);
  if (!std::isfinite(s.log_posterior)) throw Error(ErrorKind::ParamOutOfDomain, "initial state has zero posterior density");
  return s;
}

AdaptiveState initial_adaptation(const SamplerContext& ctx, const ChainState& s) {
  AdaptiveState a;
  const int J = ctx.tri.J();
  if (ctx.model.kind == ModelKind::IV) {
    a.aux.resize(J + 1);
    for (int i = 0; i <= J; ++i) a.aux[i] = RunningMoments(static_cast<int>(aux_columns(J, i).size()));
    const auto& configured = std::get<ModelIVSpec>(ctx.model.dep);
    a.copula = RunningMoments(
        static_cast<int>(free_copula_params(std::get<ModelIVSpec>(s.params.dep), configured).size()));
  }
  for (const auto& B : covariance_blocks(s.params.dep)) a.iw_sum.push_back(MatrixXd::Zero(B.rows(), B.cols()));
  return a;
}

void augmented_data_update(ChainState& s, AdaptiveState& adapt, const SamplerContext& ctx, Rng& rng) {
  if (ctx.model.kind != ModelKind::IV) return;
  const int J = ctx.tri.J();
  const auto& spec = std::get<ModelIVSpec>(s.params.dep);
  const VectorXd beta = s.params.theta.beta();
  for (int i = 1; i <= J; ++i) {
    const std::vector<int> cols = aux_columns(J, i);
    VectorXd x(cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) x(k) = s.levels(i, cols[k]);
    auto target = [&](const MatrixXd& lv) {
      double out = 0.0;
      for (int c : cols) out += normal_logpdf(lv(i, c), beta(c), spec.Sigma_diag(c));
      return out + copula_year_logdensity(lv, i, beta, spec);
    };
    const VectorXd prop = euclidean_am_propose(x, adapt.aux[i], ctx.am, rng);
    const double old_target = target(s.levels);
    MatrixXd trial = s.levels;
    for (std::size_t k = 0; k < cols.size(); ++k) trial(i, cols[k]) = prop(k);
    const double new_target = target(trial);
    const bool acc = mh_accept(new_target, old_target, 0.0, 0.0, rng);
    if (acc) {
      s.levels = std::move(trial);
      x = prop;
    }
    adapt.aux_rate.record(acc);
    if (adapt.adapting) adapt.aux[i].update(x);
  }
}

void gibbs_sweep(ChainState& s, AdaptiveState& adapt, const SamplerContext& ctx, Rng& rng) {
  const auto& m = ctx.model;
  switch (m.kind) {
    case ModelKind::I: {
      const auto post = model_one_full_conditional(ctx.tri, s.params.theta, prior_mean(m.hyper), prior_var(s));
      s.params.theta.set_beta(draw_dev_factors(post, rng));
      if (m.sample_hyper) draw_hyper(s, m.hyper, rng);
      if (m.sample_scales) model_one_scales(s, adapt, ctx, rng);
      break;
    }
    case ModelKind::II:
    case ModelKind::III: {
      const WhitenedData wd = whiten_observations(ctx.om, s.params.dep, s.params.theta);
      const auto post = dev_factor_full_conditional(wd, prior_mean(m.hyper), prior_var(s));
      s.params.theta.set_beta(draw_dev_factors(post, rng));
      if (m.sample_hyper) draw_hyper(s, m.hyper, rng);
      if (m.sample_covariance) {
        if (m.kind == ModelKind::II)
          model_two_covariance(s, ctx, rng);
        else
          model_three_covariance(s, adapt, ctx, rng);
      }
      break;
    }
    case ModelKind::IV:
      model_four_stage_one(s, adapt, ctx, rng);
      augmented_data_update(s, adapt, ctx, rng);
      if (m.sample_covariance) model_four_copula(s, adapt, ctx, rng);
      break;
  }
  s.log_posterior = compute_log_posterior(ctx, s);
  if (!std::isfinite(s.log_posterior)) throw Error(ErrorKind::ParamOutOfDomain, "sweep produced non-finite log posterior");
}

std::vector<std::string> trace_names(const SamplerContext& ctx, const ChainState& s) {
  const int J = ctx.tri.J();
  const auto& m = ctx.model;
  std::vector<std::string> names;
  for (int j = 0; j <= J; ++j) names.push_back("phi_" + std::to_string(j));
  for (int j = 0; j < J; ++j) names.push_back("psi_" + std::to_string(j));
  for (int j = 0; j <= J; ++j) names.push_back("s2_" + std::to_string(j));
  for (int j = 0; j < J; ++j) names.push_back("t2_" + std::to_string(j));
  if (m.kind == ModelKind::I && m.sample_scales) {
    for (int j = 0; j <= J; ++j) names.push_back("sigma2_" + std::to_string(j));
    for (int j = 0; j < J; ++j) names.push_back("tau2_" + std::to_string(j));
  }
  if ((m.kind == ModelKind::II || m.kind == ModelKind::III) && m.sample_covariance) {
    const auto blocks = covariance_blocks(s.params.dep);
    for (std::size_t b = 0; b < blocks.size(); ++b)
      for (Eigen::Index r = 0; r < blocks[b].rows(); ++r)
        for (Eigen::Index c = r; c < blocks[b].cols(); ++c)
          names.push_back("cov_" + std::to_string(b) + "_" + std::to_string(r) + "_" + std::to_string(c));
  }
  if (m.kind == ModelKind::IV) {
    const auto& spec = std::get<ModelIVSpec>(s.params.dep);
    if (m.sample_scales)
      for (int c = 0; c <= 2 * J; ++c) names.push_back("sdiag_" + std::to_string(c));
    if (m.sample_covariance) {
      for (std::size_t k = 0; k < spec.mix_P.size(); ++k) names.push_back("rho_P_" + std::to_string(k));
      for (std::size_t k = 0; k < spec.mix_I.size(); ++k) names.push_back("rho_I_" + std::to_string(k));
    }
    for (int i = 1; i <= J; ++i)
      for (int c : aux_columns(J, i)) {
        const bool pay = c <= J;
        names.push_back(std::string(pay ? "aux_P_" : "aux_I_") + std::to_string(i) + "_" +
                        std::to_string(pay ? c : c - J - 1));
      }
  }
  return names;
}

std::vector<double> trace_record(const SamplerContext& ctx, const ChainState& s) {
  const int J = ctx.tri.J();
  const auto& m = ctx.model;
  const auto& th = s.params.theta;
  std::vector<double> v;
  for (int j = 0; j <= J; ++j) v.push_back(th.phi(j));
  for (int j = 0; j < J; ++j) v.push_back(th.psi(j));
  for (int j = 0; j <= J; ++j) v.push_back(s.params.s2(j));
  for (int j = 0; j < J; ++j) v.push_back(s.params.t2(j));
  if (m.kind == ModelKind::I && m.sample_scales) {
    for (int j = 0; j <= J; ++j) v.push_back(th.sigma(j) * th.sigma(j));
    for (int j = 0; j < J; ++j) v.push_back(th.tau(j) * th.tau(j));
  }
  if ((m.kind == ModelKind::II || m.kind == ModelKind::III) && m.sample_covariance) {
    for (const auto& B : covariance_blocks(s.params.dep))
      for (Eigen::Index r = 0; r < B.rows(); ++r)
        for (Eigen::Index c = r; c < B.cols(); ++c) v.push_back(B(r, c));
  }
  if (m.kind == ModelKind::IV) {
    const auto& spec = std::get<ModelIVSpec>(s.params.dep);
    if (m.sample_scales)
      for (int c = 0; c <= 2 * J; ++c) v.push_back(spec.Sigma_diag(c));
    if (m.sample_covariance) {
      const VectorXd r = copula_params(spec);
      for (Eigen::Index k = 0; k < r.size(); ++k) v.push_back(r(k));
    }
    for (int i = 1; i <= J; ++i)
      for (int c : aux_columns(J, i)) v.push_back(s.levels(i, c));
  }
  return v;
}

ChainState state_from_trace(const SamplerContext& ctx, const ChainState& templ, const std::vector<std::string>& names,
                            const std::vector<double>& row) {
  if (names.size() != row.size()) throw Error(ErrorKind::LengthMismatch, "trace row and header lengths differ");
  std::map<std::string, double> val;
  for (std::size_t k = 0; k < names.size(); ++k) val[names[k]] = row[k];
  auto get = [&](const std::string& key, double& slot) {
    if (auto it = val.find(key); it != val.end()) slot = it->second;
  };
  const int J = ctx.tri.J();
  ChainState s = templ;
  auto& th = s.params.theta;
  for (int j = 0; j <= J; ++j) {
    get("phi_" + std::to_string(j), th.phi(j));
    get("s2_" + std::to_string(j), s.params.s2(j));
    double v = th.sigma(j) * th.sigma(j);
    get("sigma2_" + std::to_string(j), v);
    th.sigma(j) = std::sqrt(v);
  }
  for (int j = 0; j < J; ++j) {
    get("psi_" + std::to_string(j), th.psi(j));
    get("t2_" + std::to_string(j), s.params.t2(j));
    double v = th.tau(j) * th.tau(j);
    get("tau2_" + std::to_string(j), v);
    th.tau(j) = std::sqrt(v);
  }
  if (ctx.model.kind == ModelKind::II || ctx.model.kind == ModelKind::III) {
    auto blocks = covariance_blocks(s.params.dep);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      for (Eigen::Index r = 0; r < blocks[b].rows(); ++r)
        for (Eigen::Index c = r; c < blocks[b].cols(); ++c) {
          get("cov_" + std::to_string(b) + "_" + std::to_string(r) + "_" + std::to_string(c), blocks[b](r, c));
          blocks[b](c, r) = blocks[b](r, c);
        }
      set_covariance_block(s.params.dep, b, blocks[b]);
    }
  }
  if (ctx.model.kind == ModelKind::IV) {
    auto& spec = std::get<ModelIVSpec>(s.params.dep);
    for (int c = 0; c <= 2 * J; ++c) get("sdiag_" + std::to_string(c), spec.Sigma_diag(c));
    for (std::size_t k = 0; k < spec.mix_P.size(); ++k) get("rho_P_" + std::to_string(k), spec.mix_P.components()[k].second.rho);
    for (std::size_t k = 0; k < spec.mix_I.size(); ++k) get("rho_I_" + std::to_string(k), spec.mix_I.components()[k].second.rho);
    if (s.levels.size() == 0) s.levels = observed_levels(ctx.tri);
    for (int i = 1; i <= J; ++i)
      for (int c : aux_columns(J, i)) {
        const bool pay = c <= J;
        get(std::string(pay ? "aux_P_" : "aux_I_") + std::to_string(i) + "_" + std::to_string(pay ? c : c - J - 1),
            s.levels(i, c));
      }
  }
  return s;
}

ChainResult run_chain(const SamplerContext& ctx, const SamplerConfig& cfg, int chain) {
  if (cfg.sweeps < 1 || cfg.thin < 1) throw Error(ErrorKind::ConfigError, "sampler.sweeps and sampler.thin must be positive");
  if (!(cfg.burnin_fraction >= 0.0 && cfg.burnin_fraction < 1.0))
    throw Error(ErrorKind::ConfigError, "sampler.burnin_fraction must lie in [0,1)");
  Rng init_rng = make_rng(cfg.seed, 2 * static_cast<std::uint64_t>(chain) + 1);
  Rng rng = make_rng(cfg.seed, 2 * static_cast<std::uint64_t>(chain));
  ChainResult res;
  ChainState state = initial_state(ctx, cfg.init_jitter, init_rng);
  res.adapt = initial_adaptation(ctx, state);
  res.names = trace_names(ctx, state);
  const int burnin = static_cast<int>(std::floor(cfg.burnin_fraction * cfg.sweeps));
  for (int t = 0; t < cfg.sweeps; ++t) {
    res.adapt.adapting = ctx.am.continue_adapting || t < burnin;
    gibbs_sweep(state, res.adapt, ctx, rng);
    if ((t + 1) % cfg.thin == 0) res.rows.push_back(trace_record(ctx, state));
  }
  res.final_state = std::move(state);
  return res;
}

std::vector<ChainResult> run_chains_serial(const SamplerContext& ctx, const SamplerConfig& cfg) {
  std::vector<ChainResult> out;
  for (int c = 0; c < cfg.chains; ++c) out.push_back(run_chain(ctx, cfg, c));
  return out;
}

std::vector<ChainResult> run_chains(const SamplerContext& ctx, const SamplerConfig& cfg) {
  std::vector<ChainResult> out(cfg.chains);
  std::vector<std::exception_ptr> errors(cfg.chains);
#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < cfg.chains; ++c) {
    try {
      out[c] = run_chain(ctx, cfg, c);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace picres
