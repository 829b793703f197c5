#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace reebldp {

/// Incremental FNV-1a (64 bit).
class Fnv1a {
 public:
  Fnv1a& add(std::string_view bytes) noexcept;
  Fnv1a& add(double v) noexcept;
  Fnv1a& add(std::span<const double> v) noexcept;
  std::uint64_t value() const noexcept { return h_; }
  /// 16 lowercase hex digits.
  std::string hex() const;

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

}  // namespace reebldp
