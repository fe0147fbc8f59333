#include "blocka2a/signature.hpp"

#include "blocka2a/bls/bls.hpp"
#include "blocka2a/ed25519.hpp"
#include "blocka2a/errors.hpp"

namespace blocka2a {

std::string_view scheme_name(Scheme s) {
    return s == Scheme::Standard ? "Ed25519VerificationKey2020" : "Bls12381G2Key2020";
}

Scheme scheme_from_name(std::string_view name) {
    if (name == "Ed25519VerificationKey2020") return Scheme::Standard;
    if (name == "Bls12381G2Key2020") return Scheme::Aggregatable;
    throw SchemeError("unknown key scheme: " + std::string(name));
}

KeyPair generate_keypair(Scheme scheme, BytesView seed) {
    KeyPair kp;
    kp.scheme = scheme;
    if (scheme == Scheme::Standard) {
        auto ed = ed25519::ed25519_keygen(seed);
        kp.secret = std::move(ed.secret);
        kp.public_key = std::move(ed.public_key);
    } else {
        auto b = bls::bls_keygen(seed);
        kp.secret = std::move(b.secret);
        kp.public_key = std::move(b.public_key);
    }
    return kp;
}

Signature sign(const KeyPair& key, BytesView message) { return sign(key.scheme, key.secret, message); }

Signature sign(Scheme scheme, BytesView secret, BytesView message) {
    Signature s;
    s.scheme = scheme;
    if (scheme == Scheme::Standard) {
        s.bytes = ed25519::ed25519_sign(secret, message);
    } else {
        s.bytes = bls::bls_sign(secret, message);
    }
    return s;
}

bool verify(Scheme scheme, BytesView public_key, BytesView message, const Signature& sig) {
    if (sig.scheme != scheme) throw SchemeError("signature scheme does not match verification key");
    if (scheme == Scheme::Standard) {
        return ed25519::ed25519_verify(public_key, message, sig.bytes);
    }
    return bls::bls_verify(public_key, message, sig.bytes);
}

AggregateSignature aggregate(const std::vector<Signature>& sigs) {
    if (sigs.empty()) throw ArgumentError("cannot aggregate an empty signature list");
    std::vector<Bytes> raw;
    raw.reserve(sigs.size());
    for (const auto& s : sigs) {
        if (s.scheme != Scheme::Aggregatable) throw SchemeError("only aggregatable signatures can be aggregated");
        raw.push_back(s.bytes);
    }
    AggregateSignature agg;
    agg.bytes = bls::bls_aggregate(raw);
    agg.signer_count = sigs.size();
    return agg;
}

bool verify_aggregate(const std::vector<Bytes>& public_keys, BytesView message,
                      const AggregateSignature& agg) {
    if (public_keys.size() != agg.signer_count)
        throw ArgumentError("public key count does not match aggregate signer count");
    return bls::bls_fast_aggregate_verify(public_keys, message, agg.bytes);
}

Bytes prove_possession(const KeyPair& key) {
    if (key.scheme != Scheme::Aggregatable) throw SchemeError("proof of possession is for aggregatable keys");
    return bls::bls_pop_prove(key.secret);
}

bool verify_possession(BytesView public_key, BytesView proof) {
    return bls::bls_pop_verify(public_key, proof);
}

}  // namespace blocka2a
