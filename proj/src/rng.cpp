#include "widthlab/rng.hpp"

#include <Eigen/Core>

namespace widthlab::rng {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                          std::uint64_t counter) {
  std::uint64_t state = base;
  splitmix64(state);
  state ^= 0x5851f42d4c957f2dull * (stream + 1);
  splitmix64(state);
  state ^= 0x14057b7ef767814full * (counter + 1);
  return splitmix64(state);
}

namespace {

inline double unit_open(std::uint64_t bits) {
  // (0, 1]: never zero, so log() below is safe.
  return static_cast<double>((bits >> 11) + 1) * 0x1p-53;
}

}  // namespace

void fill_standard_normal(std::mt19937_64& eng, double* out,
                          std::ptrdiff_t n) {
  constexpr std::ptrdiff_t kBatchPairs = 2048;
  Eigen::ArrayXd v1(kBatchPairs), v2(kBatchPairs), s(kBatchPairs);

  std::ptrdiff_t produced = 0;
  while (produced < n) {
    const std::ptrdiff_t want_pairs =
        std::min<std::ptrdiff_t>(kBatchPairs, (n - produced + 1) / 2);
    std::ptrdiff_t m = 0;
    while (m < want_pairs) {
      const double a = 2.0 * unit_open(eng()) - 1.0;
      const double b = 2.0 * unit_open(eng()) - 1.0;
      const double r2 = a * a + b * b;
      if (r2 >= 1.0 || r2 == 0.0) continue;
      v1[m] = a;
      v2[m] = b;
      s[m] = r2;
      ++m;
    }
    auto head = s.head(m);
    head = (-2.0 * head.log() / head).sqrt();
    for (std::ptrdiff_t i = 0; i < m; ++i) {
      out[produced++] = v1[i] * s[i];
      if (produced < n) out[produced++] = v2[i] * s[i];
    }
  }
}

}  // namespace widthlab::rng
