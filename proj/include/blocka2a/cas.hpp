#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <shared_mutex>

#include "blocka2a/digest.hpp"

namespace blocka2a {

// Content identifier for the local content-addressed store; by construction
// the digest of the stored bytes.
struct ContentId {
    Digest digest;
    auto operator<=>(const ContentId&) const = default;
    std::string hex() const { return digest.hex(); }
};

// Local stand-in for a decentralized storage network. Idempotent puts,
// exact-byte gets, concurrent readers.
class Cas {
  public:
    ContentId put(BytesView data);
    ContentId put(const Bytes& data) { return put(BytesView(data.data(), data.size())); }
    Bytes get(const ContentId& id) const;  // throws NotFoundError
    bool contains(const ContentId& id) const;
    size_t size() const;

    // Test/scenario hook: silently replace stored bytes without updating the
    // id, simulating off-chain storage corruption.
    void tamper(const ContentId& id, Bytes bytes);

    void for_each(const std::function<void(const Digest&, const Bytes&)>& fn) const;

  private:
    mutable std::shared_mutex mutex_;
    std::map<Digest, Bytes> blobs_;
};

}  // namespace blocka2a
