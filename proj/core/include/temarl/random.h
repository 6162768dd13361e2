#ifndef TEMARL_RANDOM_H_
#define TEMARL_RANDOM_H_

#include <cstdint>
#include <random>

namespace temarl {

using Rng = std::mt19937_64;

// Derives an independent stream seed from a base seed and a stream tag
// (splitmix64 finalizer), so sub-systems never share RNG state.
inline std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform double in the open interval (0, 1).
inline double UniformOpen(Rng& rng) {
  // 53 random bits, offset by half a ulp so 0 is never produced.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace temarl

#endif  // TEMARL_RANDOM_H_
