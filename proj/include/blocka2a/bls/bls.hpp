#pragma once

#include <vector>

#include "blocka2a/bytes.hpp"

namespace blocka2a::bls {

// Aggregatable signatures over BLS12-381, minimal-signature-size variant:
// secret keys are scalars mod r, public keys live in G2 (96 bytes
// compressed), signatures in G1 (48 bytes compressed).

struct BlsKeyPair {
    Bytes secret;  // 32-byte big-endian scalar
    Bytes public_key;
};

BlsKeyPair bls_keygen(BytesView seed);
Bytes bls_public_from_secret(BytesView secret);

Bytes bls_sign(BytesView secret, BytesView message);
bool bls_verify(BytesView public_key, BytesView message, BytesView signature);

// Sum of constituent signatures; constant 48-byte size for any count.
Bytes bls_aggregate(const std::vector<Bytes>& signatures);

// All signers over one shared message (aggregated public key check).
bool bls_fast_aggregate_verify(const std::vector<Bytes>& public_keys, BytesView message,
                               BytesView aggregate_signature);

// Proof of possession: blocks rogue-key attacks on aggregation.
Bytes bls_pop_prove(BytesView secret);
bool bls_pop_verify(BytesView public_key, BytesView proof);

}  // namespace blocka2a::bls
