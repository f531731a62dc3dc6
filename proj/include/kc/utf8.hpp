// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kc::utf8 {

/// Decodes UTF-8; each malformed byte becomes U+FFFD.
std::u32string decode(std::string_view bytes);
std::string encode(std::u32string_view text);

/// Byte offsets of code point starts, plus a final entry equal to size().
std::vector<std::size_t> boundaries(std::string_view bytes);

} // namespace kc::utf8
