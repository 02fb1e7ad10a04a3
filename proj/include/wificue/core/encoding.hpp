#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace wificue {

std::string base64_encode(std::string_view bytes);

// Strict standard-alphabet base64 with mandatory padding. Returns nullopt on
// any deviation (bad length, stray characters, misplaced '=').
std::optional<std::string> base64_decode(std::string_view text);

// 64-bit FNV-1a, rendered as 16 lower-case hex digits. Used for content
// fingerprints (scan ids, registry versions), not for security.
std::string fnv1a64_hex(std::string_view bytes);

// Replaces invalid UTF-8 sequences with U+FFFD.
std::string utf8_lossy(std::string_view bytes);

}  // namespace wificue
