#include "picres/copula.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "picres/errors.hpp"

namespace picres {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxEuler = 64;

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// log of Eulerian numbers A(n, m), m = 0..n-1 (A(0,0) = 1).
const std::vector<std::vector<double>>& log_eulerian() {
  static const std::vector<std::vector<double>> table = [] {
    std::vector<std::vector<double>> t(kMaxEuler + 1);
    t[0] = {0.0};
    for (int n = 1; n <= kMaxEuler; ++n) {
      t[n].assign(n, kNegInf);
      for (int m = 0; m < n; ++m) {
        double v = kNegInf;
        if (m >= 1 && m - 1 < static_cast<int>(t[n - 1].size()) && t[n - 1][m - 1] != kNegInf)
          v = log_add(v, std::log(static_cast<double>(n - m)) + t[n - 1][m - 1]);
        if (m < static_cast<int>(t[n - 1].size()) && t[n - 1][m] != kNegInf)
          v = log_add(v, std::log(static_cast<double>(m + 1)) + t[n - 1][m]);
        t[n][m] = v;
      }
    }
    t[1] = {0.0};
    return t;
  }();
  return table;
}

void check_open_cube(const VectorXd& u) {
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (!(u(i) > 0.0 && u(i) < 1.0))
      throw Error(ErrorKind::BoundaryInput, "copula density argument must lie in the open unit cube");
}

double clayton_logdensity(const VectorXd& u, double rho) {
  const int d = static_cast<int>(u.size());
  double S = 0.0, sumlog = 0.0;
  for (int i = 0; i < d; ++i) {
    const double lu = std::log(u(i));
    S += std::expm1(-rho * lu);
    sumlog += lu;
  }
  double out = 0.0;
  for (int k = 1; k < d; ++k) out += std::log1p(k * rho);
  return out - (1.0 / rho + d) * std::log1p(S) - (rho + 1.0) * sumlog;
}

double gumbel_logdensity(const VectorXd& u, double theta) {
  const int d = static_cast<int>(u.size());
  const double alpha = 1.0 / theta;
  double T = 0.0, jac = 0.0;
  for (int i = 0; i < d; ++i) {
    const double t = -std::log(u(i));
    const double lt = std::log(t);
    T += std::exp(theta * lt);
    jac += std::log(theta) + (theta - 1.0) * lt + t;
  }
  // (-1)^n psi^(n)(T) = psi(T) sum_k c_{n,k} T^{k alpha - n}, with
  // c_{n+1,k} = alpha c_{n,k-1} + (n - k alpha) c_{n,k}; all terms are nonnegative.
  std::vector<double> lc(d + 1, kNegInf), next(d + 1);
  lc[0] = 0.0;
  const double la = std::log(alpha);
  for (int n = 0; n < d; ++n) {
    std::fill(next.begin(), next.end(), kNegInf);
    for (int k = 1; k <= n + 1; ++k) {
      double v = lc[k - 1] == kNegInf ? kNegInf : la + lc[k - 1];
      const double w = n - k * alpha;
      if (k <= n && lc[k] != kNegInf && w > 0.0) v = log_add(v, std::log(w) + lc[k]);
      next[k] = v;
    }
    lc.swap(next);
  }
  const double lT = std::log(T);
  double series = kNegInf;
  for (int k = 1; k <= d; ++k)
    if (lc[k] != kNegInf) series = log_add(series, lc[k] + k * alpha * lT);
  return -std::exp(alpha * lT) + series - d * lT + jac;
}

double frank_logdensity(const VectorXd& u, double theta) {
  const int d = static_cast<int>(u.size());
  double lx = -(d - 1) * std::log(std::abs(std::expm1(-theta)));
  double jac = 0.0;
  for (int i = 0; i < d; ++i) {
    lx += std::log(std::abs(std::expm1(-theta * u(i))));
    jac += std::log(std::abs(theta)) - std::log(std::abs(std::expm1(theta * u(i))));
  }
  if (theta < 0.0) {
    // d == 2 only: (1/theta) x / (1-x)^2 with x < 0.
    const double x = -std::exp(lx);
    return std::log(x / theta) - 2.0 * std::log1p(-x) + jac;
  }
  // (-1)^d psi^(d)(T) = Li_{1-d}(x) / theta, Li_{-n}(x) = x A_n(x) / (1-x)^{n+1}.
  const int n = d - 1;
  const auto& E = log_eulerian();
  double lA = kNegInf;
  for (int m = 0; m < static_cast<int>(E[n].size()); ++m) lA = log_add(lA, E[n][m] + m * lx);
  const double x = std::exp(lx);
  return -std::log(theta) + lx + lA - d * std::log1p(-x) + jac;
}

double frank_psi(double t, double theta) {
  return -std::log1p(std::expm1(-theta) * std::exp(-t)) / theta;
}

double positive_stable(double alpha, Rng& rng) {
  if (alpha >= 1.0) return 1.0;
  const double th = M_PI * uniform01(rng);
  const double w = exponential1(rng);
  const double a = std::sin(alpha * th) / std::pow(std::sin(th), 1.0 / alpha);
  const double b = std::pow(std::sin((1.0 - alpha) * th) / w, (1.0 - alpha) / alpha);
  return a * b;
}

double log_series(double theta, Rng& rng) {
  const double p = -std::expm1(-theta);
  const double h = -theta;
  const double v = uniform01(rng);
  if (v > p) return 1.0;
  const double q = -std::expm1(h * uniform01(rng));
  if (v < q * q) {
    const double k = std::floor(1.0 + std::log(v) / std::log(q));
    return std::max(k, 1.0);
  }
  return v > q ? 1.0 : 2.0;
}

double clamp_open(double x) {
  const double lo = std::numeric_limits<double>::min();
  const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  return std::clamp(x, lo, hi);
}

double phi(double t, const ArchimedeanParam& p) {
  switch (p.family) {
    case Family::Clayton: return std::expm1(-p.rho * std::log(t)) / p.rho;
    case Family::Gumbel: return std::pow(-std::log(t), p.rho);
    case Family::Frank: return -std::log(std::expm1(-p.rho * t) / std::expm1(-p.rho));
  }
  return 0.0;
}

double dphi(double t, const ArchimedeanParam& p) {
  switch (p.family) {
    case Family::Clayton: return -std::pow(t, -p.rho - 1.0);
    case Family::Gumbel: return -p.rho * std::pow(-std::log(t), p.rho - 1.0) / t;
    case Family::Frank: return -p.rho / std::expm1(p.rho * t);
  }
  return 0.0;
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::Clayton: return "clayton";
    case Family::Gumbel: return "gumbel";
    case Family::Frank: return "frank";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "clayton") return Family::Clayton;
  if (name == "gumbel") return Family::Gumbel;
  if (name == "frank") return Family::Frank;
  throw Error(ErrorKind::ParamOutOfDomain, "unknown copula family '" + name + "'");
}

bool is_independence(const ArchimedeanParam& p) {
  return (p.family == Family::Clayton && p.rho == 0.0) || (p.family == Family::Frank && p.rho == 0.0) ||
         (p.family == Family::Gumbel && p.rho == 1.0);
}

void check_domain(const ArchimedeanParam& p, int d) {
  const bool finite = std::isfinite(p.rho);
  bool ok = finite;
  switch (p.family) {
    case Family::Clayton: ok = ok && p.rho >= 0.0; break;
    case Family::Gumbel: ok = ok && p.rho >= 1.0; break;
    case Family::Frank: ok = ok && (p.rho >= 0.0 || d <= 2); break;
  }
  if (!ok)
    throw Error(ErrorKind::ParamOutOfDomain, std::string(family_name(p.family)) + " parameter " +
                                                 std::to_string(p.rho) + " outside its domain for d=" +
                                                 std::to_string(d));
}

double copula_cdf(const VectorXd& u, const ArchimedeanParam& p) {
  const int d = static_cast<int>(u.size());
  check_domain(p, d);
  for (int i = 0; i < d; ++i) {
    if (!(u(i) >= 0.0 && u(i) <= 1.0)) throw Error(ErrorKind::BoundaryInput, "CDF argument outside [0,1]");
    if (u(i) == 0.0) return 0.0;
  }
  if (is_independence(p)) return u.prod();
  switch (p.family) {
    case Family::Clayton: {
      double S = 0.0;
      for (int i = 0; i < d; ++i) S += std::expm1(-p.rho * std::log(u(i)));
      return std::exp(-std::log1p(S) / p.rho);
    }
    case Family::Gumbel: {
      double T = 0.0;
      for (int i = 0; i < d; ++i) T += std::pow(-std::log(u(i)), p.rho);
      return std::exp(-std::pow(T, 1.0 / p.rho));
    }
    case Family::Frank: {
      double x = -1.0 / std::pow(std::expm1(-p.rho), d - 1);
      for (int i = 0; i < d; ++i) x *= std::expm1(-p.rho * u(i));
      return -std::log1p(-x) / p.rho;
    }
  }
  return 0.0;
}

double copula_logdensity(const VectorXd& u, const ArchimedeanParam& p, int max_dim) {
  const int d = static_cast<int>(u.size());
  if (d > max_dim)
    throw Error(ErrorKind::DimensionTooLarge, "copula dimension " + std::to_string(d) + " exceeds " +
                                                  std::to_string(max_dim));
  check_domain(p, d);
  check_open_cube(u);
  if (d <= 1 || is_independence(p)) return 0.0;
  switch (p.family) {
    case Family::Clayton: return clayton_logdensity(u, p.rho);
    case Family::Gumbel: return gumbel_logdensity(u, p.rho);
    case Family::Frank: return frank_logdensity(u, p.rho);
  }
  return 0.0;
}

MixtureCopula::MixtureCopula(std::vector<std::pair<double, ArchimedeanParam>> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw Error(ErrorKind::EmptyList, "mixture needs at least one component");
  double total = 0.0;
  for (const auto& [w, p] : components_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorKind::ParamOutOfDomain, "negative mixture weight");
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorKind::ParamOutOfDomain, "mixture weights sum to zero");
  for (auto& c : components_) c.first /= total;
}

bool MixtureCopula::is_independence() const {
  for (const auto& [w, p] : components_)
    if (w > 0.0 && !picres::is_independence(p)) return false;
  return true;
}

MixtureCopula independence_copula() {
  return MixtureCopula({{1.0, ArchimedeanParam{Family::Clayton, 0.0}}});
}

double mixture_cdf(const VectorXd& u, const MixtureCopula& mix) {
  double out = 0.0;
  for (const auto& [w, p] : mix.components()) out += w * copula_cdf(u, p);
  return out;
}

double mixture_logdensity(const VectorXd& u, const MixtureCopula& mix, int max_dim) {
  double out = kNegInf;
  for (const auto& [w, p] : mix.components()) {
    const double lc = copula_logdensity(u, p, max_dim);
    if (w > 0.0) out = log_add(out, std::log(w) + lc);
  }
  return out;
}

TailDependence tail_dependence(const ArchimedeanParam& p) {
  check_domain(p, 2);
  switch (p.family) {
    case Family::Clayton: return {p.rho == 0.0 ? 0.0 : std::pow(2.0, -1.0 / p.rho), 0.0};
    case Family::Gumbel: return {0.0, 2.0 - std::pow(2.0, 1.0 / p.rho)};
    case Family::Frank: return {0.0, 0.0};
  }
  return {0.0, 0.0};
}

VectorXd copula_sample_one(const ArchimedeanParam& p, int d, Rng& rng) {
  check_domain(p, d);
  VectorXd u(d);
  if (is_independence(p)) {
    for (int i = 0; i < d; ++i) u(i) = uniform01(rng);
    return u;
  }
  switch (p.family) {
    case Family::Clayton: {
      const double v = gamma_draw(1.0 / p.rho, rng);
      for (int i = 0; i < d; ++i) u(i) = std::exp(-std::log1p(exponential1(rng) / v) / p.rho);
      break;
    }
    case Family::Gumbel: {
      const double alpha = 1.0 / p.rho;
      const double v = positive_stable(alpha, rng);
      for (int i = 0; i < d; ++i) u(i) = std::exp(-std::pow(exponential1(rng) / v, alpha));
      break;
    }
    case Family::Frank: {
      if (p.rho < 0.0) {
        // Conditional inversion, valid for d = 2.
        const double a = uniform01(rng);
        const double w = uniform01(rng);
        const double g = std::expm1(-p.rho);
        u(0) = a;
        u(1) = -std::log1p(w * g / (w + (1.0 - w) * std::exp(-p.rho * a))) / p.rho;
        break;
      }
      const double v = log_series(p.rho, rng);
      for (int i = 0; i < d; ++i) u(i) = frank_psi(exponential1(rng) / v, p.rho);
      break;
    }
  }
  for (int i = 0; i < d; ++i) u(i) = clamp_open(u(i));
  return u;
}

VectorXd copula_sample_one(const MixtureCopula& mix, int d, Rng& rng) {
  const double r = uniform01(rng);
  double acc = 0.0;
  const auto& comps = mix.components();
  for (std::size_t k = 0; k < comps.size(); ++k) {
    acc += comps[k].first;
    if (r < acc || k + 1 == comps.size()) return copula_sample_one(comps[k].second, d, rng);
  }
  return copula_sample_one(comps.back().second, d, rng);
}

MatrixXd copula_sample(const ArchimedeanParam& p, int d, int n, Rng& rng) {
  MatrixXd out(n, d);
  for (int r = 0; r < n; ++r) out.row(r) = copula_sample_one(p, d, rng).transpose();
  return out;
}

MatrixXd copula_sample(const MixtureCopula& mix, int d, int n, Rng& rng) {
  MatrixXd out(n, d);
  for (int r = 0; r < n; ++r) out.row(r) = copula_sample_one(mix, d, rng).transpose();
  return out;
}

double kendall_tau_generator(const ArchimedeanParam& p, int nodes) {
  check_domain(p, 2);
  if (is_independence(p)) return 0.0;
  double s = 0.0;
  for (int k = 0; k < nodes; ++k) {
    const double t = (k + 0.5) / nodes;
    s += phi(t, p) / dphi(t, p);
  }
  return 1.0 + 4.0 * s / nodes;
}

}  // namespace picres
