#ifndef GMC_RANDOM_HPP_
#define GMC_RANDOM_HPP_

#include <cstdint>
#include <random>

namespace gmc {

using Rng = std::mt19937_64;

// Derives an independent stream from a run seed and a purpose tag, so that
// adding a consumer never shifts the draws of another.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi_exclusive) {
  return std::uniform_int_distribution<int>(lo, hi_exclusive - 1)(rng);
}

}  // namespace gmc

#endif  // GMC_RANDOM_HPP_
