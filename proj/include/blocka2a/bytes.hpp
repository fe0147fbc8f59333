#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace blocka2a {

using Bytes = std::vector<uint8_t>;
using BytesView = std::span<const uint8_t>;

Bytes to_bytes(std::string_view s);
std::string to_string(BytesView b);

// Lowercase hex, the rendering used in logs and CLI output.
std::string to_hex(BytesView b);
Bytes from_hex(std::string_view hex);

std::string base58_encode(BytesView b);
Bytes base58_decode(std::string_view s);

// Multi-field encoding: every field is preceded by its 4-byte big-endian
// length, so variable-length fields can never be confused across boundaries.
void append_u32_be(Bytes& out, uint32_t v);
void append_u64_be(Bytes& out, uint64_t v);
void append_field(Bytes& out, BytesView field);
void append_field(Bytes& out, std::string_view field);
Bytes encode_fields(std::initializer_list<BytesView> fields);

}  // namespace blocka2a
