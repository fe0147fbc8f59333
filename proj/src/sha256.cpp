#include "blocka2a/digest.hpp"

#include <sodium.h>

#include <stdexcept>

namespace blocka2a {

Digest Digest::from_hex_str(std::string_view hex) {
    Bytes raw = from_hex(hex);
    if (raw.size() != 32) throw std::invalid_argument("digest hex must decode to 32 bytes");
    Digest d;
    std::copy(raw.begin(), raw.end(), d.bytes.begin());
    return d;
}

Digest sha256(BytesView data) {
    Digest d;
    crypto_hash_sha256(d.bytes.data(), data.data(), data.size());
    return d;
}

Digest sha256(const Bytes& data) { return sha256(BytesView(data.data(), data.size())); }

Digest sha256_str(std::string_view data) {
    return sha256(BytesView(reinterpret_cast<const uint8_t*>(data.data()), data.size()));
}

}  // namespace blocka2a
