#include <immintrin.h>

#include "hetjoin/kernels.hpp"

namespace hetjoin::kernels {

__attribute__((target("avx2"))) std::size_t box_filter_avx2(const std::int32_t* const* cols, std::size_t ncols,
                                                             std::size_t count, const std::int32_t* lo,
                                                             const std::int32_t* hi, std::uint32_t* out) {
  std::size_t selected = 0;
  std::size_t r = 0;
  for (; r + 8 <= count; r += 8) {
    __m256i keep = _mm256_set1_epi32(-1);
    for (std::size_t c = 0; c < ncols; ++c) {
      const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(cols[c] + r));
      // v >= lo  <=>  !(lo > v);  v < hi  <=>  hi > v
      const __m256i below = _mm256_cmpgt_epi32(_mm256_set1_epi32(lo[c]), v);
      const __m256i under_hi = _mm256_cmpgt_epi32(_mm256_set1_epi32(hi[c]), v);
      keep = _mm256_and_si256(keep, _mm256_andnot_si256(below, under_hi));
    }
    auto mask = static_cast<unsigned>(_mm256_movemask_ps(_mm256_castsi256_ps(keep)));
    while (mask != 0) {
      const int lane = __builtin_ctz(mask);
      out[selected++] = static_cast<std::uint32_t>(r + static_cast<std::size_t>(lane));
      mask &= mask - 1;
    }
  }
  for (; r < count; ++r) {
    bool inside = true;
    for (std::size_t c = 0; c < ncols && inside; ++c) inside = cols[c][r] >= lo[c] && cols[c][r] < hi[c];
    if (inside) out[selected++] = static_cast<std::uint32_t>(r);
  }
  return selected;
}

}  // namespace hetjoin::kernels
