#include "blocka2a/bytes.hpp"

#include <cstring>
#include <stdexcept>

namespace blocka2a {

Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::string to_string(BytesView b) { return std::string(b.begin(), b.end()); }

std::string to_hex(BytesView b) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(b.size() * 2);
    for (uint8_t byte : b) {
        out.push_back(digits[byte >> 4]);
        out.push_back(digits[byte & 0x0f]);
    }
    return out;
}

static int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw std::invalid_argument("hex string has odd length");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_nibble(hex[i]);
        int lo = hex_nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex digit");
        out.push_back(static_cast<uint8_t>((hi << 4) | lo));
    }
    return out;
}

std::string base58_encode(BytesView b) {
    static const char* alphabet = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";
    size_t zeros = 0;
    while (zeros < b.size() && b[zeros] == 0) zeros++;

    std::vector<uint8_t> digits;  // base-58 digits, least significant first
    for (size_t i = zeros; i < b.size(); i++) {
        uint32_t carry = b[i];
        for (auto& d : digits) {
            carry += static_cast<uint32_t>(d) << 8;
            d = static_cast<uint8_t>(carry % 58);
            carry /= 58;
        }
        while (carry) {
            digits.push_back(static_cast<uint8_t>(carry % 58));
            carry /= 58;
        }
    }

    std::string out(zeros, '1');
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) out.push_back(alphabet[*it]);
    return out;
}

Bytes base58_decode(std::string_view s) {
    static const char* alphabet = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";
    size_t zeros = 0;
    while (zeros < s.size() && s[zeros] == '1') zeros++;

    std::vector<uint8_t> bytes;  // big-endian value, least significant last; built LSB-first
    for (size_t i = zeros; i < s.size(); i++) {
        const char* pos = strchr(alphabet, s[i]);
        if (!pos || s[i] == '\0') throw std::invalid_argument("invalid base58 character");
        uint32_t carry = static_cast<uint32_t>(pos - alphabet);
        for (auto& b : bytes) {
            carry += static_cast<uint32_t>(b) * 58;
            b = static_cast<uint8_t>(carry & 0xff);
            carry >>= 8;
        }
        while (carry) {
            bytes.push_back(static_cast<uint8_t>(carry & 0xff));
            carry >>= 8;
        }
    }

    Bytes out(zeros, 0);
    out.insert(out.end(), bytes.rbegin(), bytes.rend());
    return out;
}

void append_u32_be(Bytes& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void append_u64_be(Bytes& out, uint64_t v) {
    append_u32_be(out, static_cast<uint32_t>(v >> 32));
    append_u32_be(out, static_cast<uint32_t>(v));
}

void append_field(Bytes& out, BytesView field) {
    append_u32_be(out, static_cast<uint32_t>(field.size()));
    out.insert(out.end(), field.begin(), field.end());
}

void append_field(Bytes& out, std::string_view field) {
    append_field(out, BytesView(reinterpret_cast<const uint8_t*>(field.data()), field.size()));
}

Bytes encode_fields(std::initializer_list<BytesView> fields) {
    Bytes out;
    for (const auto& f : fields) append_field(out, f);
    return out;
}

}  // namespace blocka2a
