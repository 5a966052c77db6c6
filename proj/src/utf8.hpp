#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace siatext {

// Decodes UTF-8 into code points. Invalid byte sequences decode to U+FFFD,
// one replacement per offending byte, so decoding never fails.
std::vector<char32_t> decode_utf8(std::string_view text);

void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(const char32_t* cps, size_t n);

// Strips leading/trailing ASCII whitespace.
std::string_view trim_whitespace(std::string_view text);

}  // namespace siatext
