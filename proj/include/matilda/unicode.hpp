#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace matilda::unicode {

bool is_valid_utf8(std::string_view text);

// Splits a UTF-8 string into code points, each returned as its own UTF-8
// substring. Invalid sequences are passed through byte by byte.
std::vector<std::string_view> code_points(std::string_view text);

// Canonical composition (NFC). Input must be valid UTF-8.
std::string to_nfc(std::string_view text);

}  // namespace matilda::unicode
