#include "blocka2a/bls/bls.hpp"

#include "blocka2a/bls/pairing.hpp"
#include "blocka2a/digest.hpp"
#include "blocka2a/errors.hpp"

namespace blocka2a::bls {

namespace {

constexpr std::string_view kSigDomain = "BLOCKA2A-BLS-SIG-V1";
constexpr std::string_view kPopDomain = "BLOCKA2A-BLS-POP-V1";

mpz_class scalar_from_bytes(BytesView b) {
    mpz_class v;
    mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
    return v;
}

Bytes scalar_to_bytes32(const mpz_class& v) {
    Bytes out(32, 0);
    size_t count = 0;
    if (v != 0) {
        Bytes tmp((mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8, 0);
        mpz_export(tmp.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
        std::copy(tmp.begin(), tmp.begin() + count, out.begin() + (32 - count));
    }
    return out;
}

mpz_class load_secret(BytesView secret) {
    if (secret.size() != 32) throw KeyError("bls secret must be 32 bytes");
    mpz_class sk = scalar_from_bytes(secret);
    if (sk == 0 || sk >= group_order()) throw KeyError("bls secret scalar out of range");
    return sk;
}

Bytes compress_g1(const G1& p) {
    auto raw = g1_compress(p);
    return Bytes(raw.begin(), raw.end());
}

Bytes compress_g2(const G2& p) {
    auto raw = g2_compress(p);
    return Bytes(raw.begin(), raw.end());
}

}  // namespace

BlsKeyPair bls_keygen(BytesView seed) {
    params_selftest();
    // Derive the scalar by hashing the seed; loop on the negligible chance of 0.
    Bytes material;
    append_field(material, std::string_view("BLOCKA2A-BLS-KEYGEN"));
    append_field(material, seed);
    mpz_class sk = 0;
    for (uint32_t ctr = 0; sk == 0; ctr++) {
        Bytes round = material;
        append_u32_be(round, ctr);
        Digest h0 = sha256(round);
        round.push_back(0x01);
        Digest h1 = sha256(round);
        Bytes wide(h0.bytes.begin(), h0.bytes.end());
        wide.insert(wide.end(), h1.bytes.begin(), h1.bytes.end());
        sk = scalar_from_bytes(wide) % group_order();
    }
    BlsKeyPair kp;
    kp.secret = scalar_to_bytes32(sk);
    kp.public_key = compress_g2(pt_mul(g2_generator(), sk));
    return kp;
}

Bytes bls_public_from_secret(BytesView secret) {
    return compress_g2(pt_mul(g2_generator(), load_secret(secret)));
}

Bytes bls_sign(BytesView secret, BytesView message) {
    mpz_class sk = load_secret(secret);
    G1 h = hash_to_g1(message, kSigDomain);
    return compress_g1(pt_mul(h, sk));
}

bool bls_verify(BytesView public_key, BytesView message, BytesView signature) {
    G2 pk;
    G1 sig;
    try {
        pk = g2_decompress(public_key);
        sig = g1_decompress(signature);
    } catch (const DecodeError&) {
        return false;
    }
    if (pk.is_infinity() || sig.is_infinity()) return false;
    G1 h = hash_to_g1(message, kSigDomain);
    // e(sig, -g2) * e(H(m), pk) == 1
    return pairing_product_is_one({sig, h}, {pt_neg(g2_generator()), pk});
}

Bytes bls_aggregate(const std::vector<Bytes>& signatures) {
    if (signatures.empty()) throw ArgumentError("cannot aggregate an empty signature list");
    G1 acc = G1::infinity();
    for (const auto& s : signatures) acc = pt_add(acc, g1_decompress(s));
    return compress_g1(acc);
}

bool bls_fast_aggregate_verify(const std::vector<Bytes>& public_keys, BytesView message,
                               BytesView aggregate_signature) {
    if (public_keys.empty()) throw ArgumentError("aggregate verification needs at least one key");
    G2 apk = G2::infinity();
    try {
        for (const auto& pk : public_keys) apk = pt_add(apk, g2_decompress(pk));
    } catch (const DecodeError&) {
        return false;
    }
    G1 sig;
    try {
        sig = g1_decompress(aggregate_signature);
    } catch (const DecodeError&) {
        return false;
    }
    if (apk.is_infinity()) return false;
    G1 h = hash_to_g1(message, kSigDomain);
    return pairing_product_is_one({sig, h}, {pt_neg(g2_generator()), apk});
}

Bytes bls_pop_prove(BytesView secret) {
    mpz_class sk = load_secret(secret);
    Bytes pk = compress_g2(pt_mul(g2_generator(), sk));
    G1 h = hash_to_g1(pk, kPopDomain);
    return compress_g1(pt_mul(h, sk));
}

bool bls_pop_verify(BytesView public_key, BytesView proof) {
    G2 pk;
    G1 pop;
    try {
        pk = g2_decompress(public_key);
        pop = g1_decompress(proof);
    } catch (const DecodeError&) {
        return false;
    }
    if (pk.is_infinity() || pop.is_infinity()) return false;
    G1 h = hash_to_g1(public_key, kPopDomain);
    return pairing_product_is_one({pop, h}, {pt_neg(g2_generator()), pk});
}

}  // namespace blocka2a::bls
