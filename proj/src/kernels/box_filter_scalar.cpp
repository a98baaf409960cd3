#include "hetjoin/kernels.hpp"

namespace hetjoin::kernels {

std::size_t box_filter_scalar(const std::int32_t* const* cols, std::size_t ncols, std::size_t count,
                              const std::int32_t* lo, const std::int32_t* hi, std::uint32_t* out) {
  std::size_t selected = 0;
  for (std::size_t r = 0; r < count; ++r) {
    bool inside = true;
    for (std::size_t c = 0; c < ncols && inside; ++c) {
      const std::int32_t v = cols[c][r];
      inside = v >= lo[c] && v < hi[c];
    }
    if (inside) out[selected++] = static_cast<std::uint32_t>(r);
  }
  return selected;
}

}  // namespace hetjoin::kernels
