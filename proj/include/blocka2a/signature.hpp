#pragma once

#include <string_view>
#include <vector>

#include "blocka2a/bytes.hpp"

namespace blocka2a {

// Two schemes: an ordinary one for agent messages and transactions, and an
// aggregatable pairing-based one for multi-party milestone endorsements.
enum class Scheme { Standard, Aggregatable };

std::string_view scheme_name(Scheme s);
Scheme scheme_from_name(std::string_view name);

struct KeyPair {
    Scheme scheme{Scheme::Standard};
    Bytes secret;
    Bytes public_key;
};

struct Signature {
    Scheme scheme{Scheme::Standard};
    Bytes bytes;

    bool operator==(const Signature&) const = default;
};

struct AggregateSignature {
    Bytes bytes;
    size_t signer_count{0};
};

KeyPair generate_keypair(Scheme scheme, BytesView seed);
Signature sign(const KeyPair& key, BytesView message);
Signature sign(Scheme scheme, BytesView secret, BytesView message);
bool verify(Scheme scheme, BytesView public_key, BytesView message, const Signature& sig);

AggregateSignature aggregate(const std::vector<Signature>& sigs);
bool verify_aggregate(const std::vector<Bytes>& public_keys, BytesView message,
                      const AggregateSignature& agg);

// Proof-of-possession for aggregatable keys; required before a key may join
// any aggregate verification set.
Bytes prove_possession(const KeyPair& key);
bool verify_possession(BytesView public_key, BytesView proof);

}  // namespace blocka2a
