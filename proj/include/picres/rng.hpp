#pragma once

#include <cstdint>
#include <random>

namespace picres {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Seed for stream `stream` derived from a master seed; streams are
// addressed by counter so chain k never depends on chains < k.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

// Uniform on the open interval (0,1).
double uniform01(Rng& rng);
double std_normal(Rng& rng);
double exponential1(Rng& rng);
double gamma_draw(double shape, Rng& rng);
// Inverse-gamma with density proportional to x^{-shape-1} exp(-scale/x).
double inverse_gamma_draw(double shape, double scale, Rng& rng);

}  // namespace picres
