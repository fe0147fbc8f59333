#pragma once

#include <array>
#include <compare>
#include <cstdint>

#include "blocka2a/bytes.hpp"

namespace blocka2a {

// 32-byte SHA-256 output. Value type, totally ordered so it can key maps.
struct Digest {
    std::array<uint8_t, 32> bytes{};

    auto operator<=>(const Digest&) const = default;

    std::string hex() const { return to_hex(BytesView(bytes.data(), bytes.size())); }
    BytesView view() const { return BytesView(bytes.data(), bytes.size()); }
    Bytes to_vec() const { return Bytes(bytes.begin(), bytes.end()); }

    static Digest from_hex_str(std::string_view hex);
};

Digest sha256(BytesView data);
Digest sha256(const Bytes& data);
Digest sha256_str(std::string_view data);

}  // namespace blocka2a
