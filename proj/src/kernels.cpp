#include "picres/kernels.hpp"

#include <cmath>
#include <numbers>

#include "picres/errors.hpp"

namespace picres {

Quadrature tanh_sinh_unit(int n) {
  if (n < 2) throw Error(ErrorKind::ConfigError, "quadrature needs at least two nodes");
  constexpr double t_max = 3.0;
  const double h = 2.0 * t_max / (n - 1);
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    const double t = -t_max + k * h;
    const double s = 0.5 * std::numbers::pi * std::sinh(t);
    q.nodes(k) = 1.0 / (1.0 + std::exp(-2.0 * s));
    const double ch = std::cosh(s);
    q.weights(k) = h * 0.25 * std::numbers::pi * std::cosh(t) / (ch * ch);
  }
  return q;
}

namespace {

double density(const MixtureCopula& mix, const VectorXd& u) { return std::exp(mixture_logdensity(u, mix)); }

double slice(const MixtureCopula& mix, int d, const Quadrature& q, int a) {
  const int n = static_cast<int>(q.nodes.size());
  double s = 0.0;
  VectorXd u(d);
  u(0) = q.nodes(a);
  for (int b = 0; b < n; ++b) {
    u(1) = q.nodes(b);
    if (d == 2) {
      s += q.weights(b) * density(mix, u);
      continue;
    }
    double inner = 0.0;
    for (int c = 0; c < n; ++c) {
      u(2) = q.nodes(c);
      inner += q.weights(c) * density(mix, u);
    }
    s += q.weights(b) * inner;
  }
  return q.weights(a) * s;
}

void check_dim(int d) {
  if (d != 2 && d != 3) throw Error(ErrorKind::DimMismatch, "copula quadrature supports d = 2 or 3");
}

TailCounts tail_chunk(const ArchimedeanParam& p, long count, double q, bool upper, std::uint64_t seed, long chunk) {
  Rng rng = make_rng(seed, static_cast<std::uint64_t>(chunk));
  TailCounts t;
  t.n = count;
  for (long k = 0; k < count; ++k) {
    const VectorXd u = copula_sample_one(p, 2, rng);
    const bool a = upper ? u(0) > 1.0 - q : u(0) < q;
    const bool b = upper ? u(1) > 1.0 - q : u(1) < q;
    t.marginal += b;
    t.joint += a && b;
  }
  return t;
}

}  // namespace

double copula_integral_serial(const MixtureCopula& mix, int d, int nodes_per_axis) {
  check_dim(d);
  const Quadrature q = tanh_sinh_unit(nodes_per_axis);
  double total = 0.0;
  for (int a = 0; a < nodes_per_axis; ++a) total += slice(mix, d, q, a);
  return total;
}

double copula_integral(const MixtureCopula& mix, int d, int nodes_per_axis) {
  check_dim(d);
  const Quadrature q = tanh_sinh_unit(nodes_per_axis);
  // Per-slice partial sums are combined in index order so the result matches the serial path.
  VectorXd part(nodes_per_axis);
#pragma omp parallel for schedule(static)
  for (int a = 0; a < nodes_per_axis; ++a) part(a) = slice(mix, d, q, a);
  double total = 0.0;
  for (int a = 0; a < nodes_per_axis; ++a) total += part(a);
  return total;
}

TailCounts tail_counts_serial(const ArchimedeanParam& p, long n, double q, bool upper, std::uint64_t seed) {
  TailCounts out;
  const long chunks = (n + kTailChunk - 1) / kTailChunk;
  for (long c = 0; c < chunks; ++c) {
    const TailCounts t = tail_chunk(p, std::min(kTailChunk, n - c * kTailChunk), q, upper, seed, c);
    out.n += t.n;
    out.marginal += t.marginal;
    out.joint += t.joint;
  }
  return out;
}

TailCounts tail_counts(const ArchimedeanParam& p, long n, double q, bool upper, std::uint64_t seed) {
  const long chunks = (n + kTailChunk - 1) / kTailChunk;
  long total_n = 0, marginal = 0, joint = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : total_n, marginal, joint)
  for (long c = 0; c < chunks; ++c) {
    const TailCounts t = tail_chunk(p, std::min(kTailChunk, n - c * kTailChunk), q, upper, seed, c);
    total_n += t.n;
    marginal += t.marginal;
    joint += t.joint;
  }
  return {total_n, marginal, joint};
}

}  // namespace picres
