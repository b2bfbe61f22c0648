#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fgent {

// Corpus offsets count Unicode scalar values, not bytes (LTF convention).
// The helpers below walk UTF-8 by counting lead bytes; invalid bytes are
// treated as one character each so that offsets stay monotone.

inline bool utf8_is_continuation(unsigned char b) { return (b & 0xC0u) == 0x80u; }

inline std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char b : s)
    if (!utf8_is_continuation(b)) ++n;
  return n;
}

// Byte index of character number `cp` (== s.size() when cp is past the end).
inline std::size_t utf8_byte_index(std::string_view s, std::size_t cp) {
  std::size_t chars = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (utf8_is_continuation(static_cast<unsigned char>(s[i]))) continue;
    if (chars == cp) return i;
    ++chars;
  }
  return s.size();
}

// Substring by character offsets, end-inclusive.
inline std::string utf8_substr(std::string_view s, std::size_t start, std::size_t end_incl) {
  if (end_incl < start) return {};
  std::size_t b = utf8_byte_index(s, start);
  std::size_t e = utf8_byte_index(s, end_incl + 1);
  if (b >= s.size()) return {};
  return std::string(s.substr(b, e - b));
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split(std::string_view s, char delim) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = s.find(delim, pos);
    if (next == std::string_view::npos) {
      out.emplace_back(s.substr(pos));
      break;
    }
    out.emplace_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

// Splits into lines, accepting \n and \r\n endings; a trailing newline does
// not produce an empty final line.
inline std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    if (pos == s.size()) break;
    std::size_t next = s.find('\n', pos);
    std::string_view line =
        next == std::string_view::npos ? s.substr(pos) : s.substr(pos, next - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.emplace_back(line);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace fgent
