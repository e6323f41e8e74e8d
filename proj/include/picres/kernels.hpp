#pragma once

#include <cstdint>

#include "picres/copula.hpp"

namespace picres {

// Tanh-sinh nodes and weights on (0,1); nodes stay representably inside the interval.
struct Quadrature {
  VectorXd nodes;
  VectorXd weights;
};

Quadrature tanh_sinh_unit(int n);

// Tensor-product integral of the mixture copula density over [0,1]^d (d = 2 or 3).
double copula_integral(const MixtureCopula& mix, int d, int nodes_per_axis);
double copula_integral_serial(const MixtureCopula& mix, int d, int nodes_per_axis);

struct TailCounts {
  long n = 0;
  long marginal = 0;  // U2 in the tail
  long joint = 0;     // both in the tail
  double conditional() const { return marginal ? static_cast<double>(joint) / marginal : 0.0; }
};

constexpr long kTailChunk = 1L << 16;

// Simulates n pairs in fixed chunks, each chunk on its own RNG stream.
TailCounts tail_counts(const ArchimedeanParam& p, long n, double q, bool upper, std::uint64_t seed);
TailCounts tail_counts_serial(const ArchimedeanParam& p, long n, double q, bool upper, std::uint64_t seed);

}  // namespace picres
