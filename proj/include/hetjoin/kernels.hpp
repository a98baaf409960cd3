#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace hetjoin::kernels {

enum class Isa { Scalar, Avx2 };
std::string_view to_string(Isa isa);

// Best ISA supported by the running CPU.
Isa detected_isa();
// ISA used by the dispatching entry points; defaults to detected_isa().
Isa active_isa();
// Throws std::invalid_argument when the CPU lacks the requested ISA.
void set_active_isa(Isa isa);

// Writes to `out` (capacity `count`) the ascending row indices r with
// lo[c] <= cols[c][r] < hi[c] for every column c, and returns how many.
std::size_t box_filter_scalar(const std::int32_t* const* cols, std::size_t ncols, std::size_t count,
                              const std::int32_t* lo, const std::int32_t* hi, std::uint32_t* out);
std::size_t box_filter_avx2(const std::int32_t* const* cols, std::size_t ncols, std::size_t count,
                            const std::int32_t* lo, const std::int32_t* hi, std::uint32_t* out);
std::size_t box_filter(const std::int32_t* const* cols, std::size_t ncols, std::size_t count,
                       const std::int32_t* lo, const std::int32_t* hi, std::uint32_t* out);

}  // namespace hetjoin::kernels
