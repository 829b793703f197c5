#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace reebldp {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32-10 block function.
PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Stream id for (seed, module, task): FNV-1a over the module name mixed with
/// splitmix64.
std::uint64_t derive_stream(std::uint64_t seed, std::string_view module, std::uint64_t task) noexcept;

/// Counter-based normal source. The draw for (trajectory, step, slot) is a
/// pure function of the stream, so results do not depend on scheduling.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t stream) noexcept;

  /// Two standard normals (Box-Muller) for one (trajectory, step, slot).
  std::array<double, 2> normals2(std::uint32_t trajectory, std::uint64_t step, std::uint32_t slot = 0) const noexcept;
  /// Two uniforms in (0, 1) with 53-bit resolution.
  std::array<double, 2> uniforms2(std::uint32_t trajectory, std::uint64_t step, std::uint32_t slot = 0) const noexcept;

 private:
  PhiloxCounter block(std::uint32_t trajectory, std::uint64_t step, std::uint32_t slot) const noexcept;

  PhiloxKey key_;
};

}  // namespace reebldp
