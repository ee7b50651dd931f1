#pragma once

#include <array>
#include <cstdint>

namespace drg {

// Counter-based generator (Philox4x32-10). A draw is a pure function of the
// 64-bit key and the 128-bit counter, so any subset of draws can be produced
// in any order or on any thread with identical results.
class Philox {
 public:
  using Counter = std::array<std::uint32_t, 4>;

  explicit Philox(std::uint64_t key) noexcept
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)} {}

  Counter operator()(Counter ctr) const noexcept;

 private:
  std::array<std::uint32_t, 2> key_;
};

// Uniform in (0, 1] from 53 random bits.
double to_unit_open_closed(std::uint32_t hi, std::uint32_t lo) noexcept;

// Standard normal keyed by (seed, a, b, c); Box-Muller on one Philox block.
double normal_at(std::uint64_t seed, std::uint32_t a, std::uint32_t b, std::uint32_t c) noexcept;

// Uniform in (0, 1] keyed by (seed, a, b, c).
double uniform_at(std::uint64_t seed, std::uint32_t a, std::uint32_t b, std::uint32_t c) noexcept;

}  // namespace drg
