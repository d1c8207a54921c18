#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace lbsim {

// Abstract network address. Stored as a 32-bit value so packets stay
// trivially copyable in the event queue; rendered dotted-quad only at the
// config and log boundaries.
using Addr = std::uint32_t;

inline std::string format_addr(Addr a) {
  return std::to_string((a >> 24) & 0xff) + "." +
         std::to_string((a >> 16) & 0xff) + "." +
         std::to_string((a >> 8) & 0xff) + "." + std::to_string(a & 0xff);
}

inline std::optional<Addr> parse_addr(const std::string& s) {
  Addr out = 0;
  int octets = 0;
  std::uint32_t cur = 0;
  bool have_digit = false;
  for (char c : s) {
    if (c >= '0' && c <= '9') {
      cur = cur * 10 + static_cast<std::uint32_t>(c - '0');
      if (cur > 255) return std::nullopt;
      have_digit = true;
    } else if (c == '.') {
      if (!have_digit || octets == 3) return std::nullopt;
      out = (out << 8) | cur;
      cur = 0;
      have_digit = false;
      ++octets;
    } else {
      return std::nullopt;
    }
  }
  if (!have_digit || octets != 3) return std::nullopt;
  return (out << 8) | cur;
}

}  // namespace lbsim
