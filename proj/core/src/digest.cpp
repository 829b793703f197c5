#include "reebldp/digest.hpp"

#include <bit>
#include <cstdio>

namespace reebldp {

Fnv1a& Fnv1a::add(std::string_view bytes) noexcept {
  for (char c : bytes) {
    h_ ^= static_cast<unsigned char>(c);
    h_ *= 0x100000001b3ull;
  }
  return *this;
}

Fnv1a& Fnv1a::add(double v) noexcept {
  // little-endian byte order regardless of host
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    h_ ^= (bits >> (8 * i)) & 0xffu;
    h_ *= 0x100000001b3ull;
  }
  return *this;
}

Fnv1a& Fnv1a::add(std::span<const double> v) noexcept {
  for (double x : v) add(x);
  return *this;
}

std::string Fnv1a::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
  return buf;
}

}  // namespace reebldp
