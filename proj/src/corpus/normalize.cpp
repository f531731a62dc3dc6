// SPDX-License-Identifier: Apache-2.0
#include <string>

#include "kc/corpus.hpp"
#include "kc/utf8.hpp"

namespace kc::corpus {

namespace {

constexpr char32_t kZwj = 0x200D;

bool is_emoji(char32_t c) {
  return (c >= 0x1F600 && c <= 0x1F64F)    // Emoticons
         || (c >= 0x1F300 && c <= 0x1F5FF) // Misc Symbols and Pictographs
         || (c >= 0x1F680 && c <= 0x1F6FF) // Transport and Map
         || (c >= 0x1F900 && c <= 0x1F9FF) // Supplemental Symbols and Pictographs
         || (c >= 0x2700 && c <= 0x27BF)   // Dingbats
         || (c >= 0xFE00 && c <= 0xFE0F)   // Variation Selectors
         || (c >= 0xE0100 && c <= 0xE01EF) // Variation Selectors Supplement
         || c == kZwj;
}

bool is_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_lower_alpha(char32_t c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }
bool is_word(char32_t c) { return is_lower_alpha(c) || is_digit(c) || c == '_'; }
bool is_scheme_char(char32_t c) {
  return is_lower_alpha(c) || is_digit(c) || c == '+' || c == '-';
}

// Simple case mapping for Latin, Greek and Cyrillic uppercase blocks.
char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') {
    return c + 32;
  }
  if (c < 0xC0) {
    return c;
  }
  if (c <= 0xDE) {
    return c == 0xD7 ? c : c + 32;
  }
  if (c >= 0x0100 && c <= 0x017F) {
    if ((c <= 0x012F || (c >= 0x0132 && c <= 0x0137) || (c >= 0x014A && c <= 0x0177)) &&
        c % 2 == 0) {
      return c + 1;
    }
    if (((c >= 0x0139 && c <= 0x0148) || (c >= 0x0179 && c <= 0x017E)) && c % 2 == 1) {
      return c + 1;
    }
    if (c == 0x0178) {
      return 0x00FF;
    }
    return c;
  }
  if (c >= 0x0391 && c <= 0x03A9 && c != 0x03A2) {
    return c + 32;
  }
  switch (c) {
  case 0x0386:
    return 0x03AC;
  case 0x0388:
  case 0x0389:
  case 0x038A:
    return c + 37;
  case 0x038C:
    return 0x03CC;
  case 0x038E:
  case 0x038F:
    return c + 63;
  default:
    break;
  }
  if (c >= 0x0410 && c <= 0x042F) {
    return c + 32;
  }
  if (c >= 0x0400 && c <= 0x040F) {
    return c + 80;
  }
  return c;
}

std::size_t skip_to_space(const std::u32string &s, std::size_t i) {
  while (i < s.size() && !is_space(s[i])) {
    ++i;
  }
  return i;
}

// Length of a URL scheme plus "://" starting at i, or 0.
std::size_t scheme_url_prefix(const std::u32string &s, std::size_t i) {
  if (!is_lower_alpha(s[i]) || (i > 0 && is_scheme_char(s[i - 1]))) {
    return 0;
  }
  std::size_t j = i;
  while (j < s.size() && is_scheme_char(s[j])) {
    ++j;
  }
  if (j + 3 <= s.size() && s[j] == ':' && s[j + 1] == '/' && s[j + 2] == '/') {
    return j + 3 - i;
  }
  return 0;
}

bool starts_www(const std::u32string &s, std::size_t i) {
  return i + 4 <= s.size() && s[i] == 'w' && s[i + 1] == 'w' && s[i + 2] == 'w' &&
         s[i + 3] == '.' && (i == 0 || !is_word(s[i - 1]));
}

std::u32string apply_rules(const std::u32string &in) {
  std::u32string s;
  s.reserve(in.size());
  for (const char32_t c : in) {
    s.push_back(to_lower(c));
  }

  std::u32string out;
  out.reserve(s.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < s.size()) {
    const char32_t c = s[i];
    if (is_space(c)) {
      pending_space = !out.empty();
      ++i;
      continue;
    }
    if (is_emoji(c)) {
      ++i;
      continue;
    }
    if (scheme_url_prefix(s, i) > 0 || starts_www(s, i)) {
      i = skip_to_space(s, i);
      continue;
    }
    if (c == '@' && (i == 0 || !is_word(s[i - 1])) && i + 1 < s.size() && is_word(s[i + 1])) {
      ++i;
      while (i < s.size() && is_word(s[i])) {
        ++i;
      }
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

} // namespace

std::string normalize_text(std::string_view raw) {
  std::u32string current = utf8::decode(raw);
  for (;;) {
    std::u32string next = apply_rules(current);
    if (next == current) {
      break;
    }
    current = std::move(next);
  }
  return utf8::encode(current);
}

} // namespace kc::corpus
