#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace graphletqa::util {

/// Number of Unicode scalar values in a UTF-8 string (count of non-continuation
/// bytes).
std::size_t scalar_count(std::string_view text) noexcept;

/// Decodes UTF-8; malformed sequences become U+FFFD.
std::u32string decode_utf8(std::string_view text);

void append_utf8(std::string& out, char32_t cp);

}  // namespace graphletqa::util
