#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace widthlab::rng {

// splitmix64 step. Small, well-mixed generator used only to derive seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic sub-stream seed. Streams derived from the same base with
// different (stream, counter) pairs are independent for practical purposes.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                          std::uint64_t counter = 0);

// Fills `out` with i.i.d. standard normals using the Marsaglia polar method
// on top of mt19937_64. Accepted pairs are transformed in batches so the
// log/sqrt calls vectorize. The output is a deterministic function of the
// engine state and n; a spare half-pair at the end is discarded.
void fill_standard_normal(std::mt19937_64& eng, double* out, std::ptrdiff_t n);

inline void fill_standard_normal(std::mt19937_64& eng,
                                 Eigen::Ref<Eigen::VectorXd> out) {
  fill_standard_normal(eng, out.data(), out.size());
}

}  // namespace widthlab::rng
