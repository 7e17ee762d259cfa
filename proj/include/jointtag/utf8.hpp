#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace jointtag::utf8 {

// Splits a UTF-8 string into code points, each returned as its own byte
// string. Invalid lead/continuation bytes are passed through one byte at a
// time so that no input is ever dropped.
inline std::vector<std::string> split_code_points(std::string_view s) {
  std::vector<std::string> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto lead = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if (lead >= 0xF0 && lead < 0xF8) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = 3;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    if (lead >= 0xF8 || i + len > s.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

}  // namespace jointtag::utf8
