#include "drg/rng.hpp"

#include <cmath>
#include <numbers>

namespace drg {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox::Counter Philox::operator()(Counter ctr) const noexcept {
  std::array<std::uint32_t, 2> key = key_;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

double to_unit_open_closed(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

double normal_at(std::uint64_t seed, std::uint32_t a, std::uint32_t b, std::uint32_t c) noexcept {
  const auto r = Philox(seed)({a, b, c, 0u});
  const double u1 = to_unit_open_closed(r[0], r[1]);
  const double u2 = to_unit_open_closed(r[2], r[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double uniform_at(std::uint64_t seed, std::uint32_t a, std::uint32_t b, std::uint32_t c) noexcept {
  const auto r = Philox(seed)({a, b, c, 1u});
  return to_unit_open_closed(r[0], r[1]);
}

}  // namespace drg
