#include "blocka2a/ed25519.hpp"

#include <sodium.h>

#include <mutex>

#include "blocka2a/errors.hpp"

namespace blocka2a::ed25519 {

namespace {

void ensure_sodium() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) throw std::runtime_error("libsodium initialization failed");
    });
}

}  // namespace

Ed25519KeyPair ed25519_keygen(BytesView seed32) {
    ensure_sodium();
    if (seed32.size() != crypto_sign_SEEDBYTES) throw KeyError("ed25519 seed must be 32 bytes");
    Ed25519KeyPair kp;
    kp.public_key.resize(crypto_sign_PUBLICKEYBYTES);
    kp.secret.resize(crypto_sign_SECRETKEYBYTES);
    crypto_sign_seed_keypair(kp.public_key.data(), kp.secret.data(), seed32.data());
    return kp;
}

Bytes ed25519_sign(BytesView secret, BytesView message) {
    ensure_sodium();
    if (secret.size() != crypto_sign_SECRETKEYBYTES) throw KeyError("malformed ed25519 secret key");
    Bytes sig(crypto_sign_BYTES);
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), secret.data());
    return sig;
}

bool ed25519_verify(BytesView public_key, BytesView message, BytesView signature) {
    ensure_sodium();
    if (public_key.size() != crypto_sign_PUBLICKEYBYTES) return false;
    if (signature.size() != crypto_sign_BYTES) return false;
    return crypto_sign_verify_detached(signature.data(), message.data(), message.size(),
                                       public_key.data()) == 0;
}

}  // namespace blocka2a::ed25519
