#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace mb {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::string_view data);
std::string sha256_hex(std::string_view data);
std::string to_hex(const Digest& d);

// SHA-256 over length-prefixed parts, so ("ab","c") and ("a","bc") differ.
Digest digest_parts(std::initializer_list<std::string_view> parts);

// First eight digest bytes, big-endian.
std::uint64_t leading_u64(const Digest& d);

std::string base64_encode(std::string_view data);
// Throws invalid_params on malformed input.
std::string base64_decode(std::string_view text);

}  // namespace mb
