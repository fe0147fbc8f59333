#pragma once

#include "blocka2a/bytes.hpp"

namespace blocka2a::ed25519 {

struct Ed25519KeyPair {
    Bytes secret;  // 64-byte libsodium expanded secret key
    Bytes public_key;
};

Ed25519KeyPair ed25519_keygen(BytesView seed32);
Bytes ed25519_sign(BytesView secret, BytesView message);
bool ed25519_verify(BytesView public_key, BytesView message, BytesView signature);

}  // namespace blocka2a::ed25519
