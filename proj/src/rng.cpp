#include "picres/rng.hpp"

#include <cmath>

namespace picres {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(stream_seed(seed, stream));
}

double uniform01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double std_normal(Rng& rng) {
  // A fresh distribution per call keeps draws independent of cached state.
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

double exponential1(Rng& rng) { return -std::log(uniform01(rng)); }

double gamma_draw(double shape, Rng& rng) {
  return std::gamma_distribution<double>(shape, 1.0)(rng);
}

double inverse_gamma_draw(double shape, double scale, Rng& rng) {
  return scale / gamma_draw(shape, rng);
}

}  // namespace picres
