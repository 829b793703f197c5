#include "reebldp/rng.hpp"

#include <cmath>
#include <numbers>

namespace reebldp {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// 53-bit uniform in (0, 1) from two words
inline double to_open01(std::uint32_t a, std::uint32_t b) noexcept {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(a) << 32) | b) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_stream(std::uint64_t seed, std::string_view module, std::uint64_t task) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char ch : module) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ull;
  }
  return splitmix64(splitmix64(seed ^ h) ^ splitmix64(task + 0x632BE59BD9B4E019ull));
}

NormalStream::NormalStream(std::uint64_t stream) noexcept
    : key_{static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

PhiloxCounter NormalStream::block(std::uint32_t trajectory, std::uint64_t step, std::uint32_t slot) const noexcept {
  return philox4x32({slot, static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), trajectory}, key_);
}

std::array<double, 2> NormalStream::uniforms2(std::uint32_t trajectory, std::uint64_t step,
                                              std::uint32_t slot) const noexcept {
  const PhiloxCounter r = block(trajectory, step, slot);
  return {to_open01(r[0], r[1]), to_open01(r[2], r[3])};
}

std::array<double, 2> NormalStream::normals2(std::uint32_t trajectory, std::uint64_t step,
                                             std::uint32_t slot) const noexcept {
  const auto u = uniforms2(trajectory, step, slot);
  const double rad = std::sqrt(-2.0 * std::log(u[0]));
  const double th = 2.0 * std::numbers::pi * u[1];
  return {rad * std::cos(th), rad * std::sin(th)};
}

}  // namespace reebldp
