#pragma once

#include <charconv>
#include <string>

namespace ratchet {

/// Locale-independent decimal rendering with 17 significant digits, enough to
/// round-trip any double bit-exactly.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v,
                                 std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, ptr);
}

inline bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc{} && ptr == e;
}

}  // namespace ratchet
