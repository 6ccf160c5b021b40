#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace reldisc::detail {

/// Marker for a byte that does not start a valid UTF-8 sequence.
inline constexpr char32_t kInvalidCodepoint = 0xFFFFFFFF;

/// Decodes one code point starting at `pos` and advances `pos`. Overlong
/// forms, surrogates and truncated sequences consume one byte and yield
/// kInvalidCodepoint.
char32_t decode_next(std::string_view s, std::size_t& pos);

void append_utf8(std::string& out, char32_t cp);

}  // namespace reldisc::detail
