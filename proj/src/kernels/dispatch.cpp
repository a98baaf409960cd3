#include <atomic>
#include <stdexcept>

#include "hetjoin/kernels.hpp"

namespace hetjoin::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detected_isa()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa detected_isa() {
  static const Isa isa = cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
  return isa;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::Avx2 && detected_isa() != Isa::Avx2) throw std::invalid_argument("CPU does not support AVX2");
  active().store(isa, std::memory_order_relaxed);
}

std::size_t box_filter(const std::int32_t* const* cols, std::size_t ncols, std::size_t count,
                       const std::int32_t* lo, const std::int32_t* hi, std::uint32_t* out) {
  if (active_isa() == Isa::Avx2) return box_filter_avx2(cols, ncols, count, lo, hi, out);
  return box_filter_scalar(cols, ncols, count, lo, hi, out);
}

}  // namespace hetjoin::kernels
