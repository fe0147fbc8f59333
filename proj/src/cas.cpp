#include "blocka2a/cas.hpp"

#include "blocka2a/errors.hpp"

namespace blocka2a {

ContentId Cas::put(BytesView data) {
    ContentId id{sha256(data)};
    std::unique_lock lock(mutex_);
    blobs_.try_emplace(id.digest, data.begin(), data.end());
    return id;
}

Bytes Cas::get(const ContentId& id) const {
    std::shared_lock lock(mutex_);
    auto it = blobs_.find(id.digest);
    if (it == blobs_.end()) throw NotFoundError("no content stored for " + id.hex());
    return it->second;
}

bool Cas::contains(const ContentId& id) const {
    std::shared_lock lock(mutex_);
    return blobs_.contains(id.digest);
}

size_t Cas::size() const {
    std::shared_lock lock(mutex_);
    return blobs_.size();
}

void Cas::for_each(const std::function<void(const Digest&, const Bytes&)>& fn) const {
    std::shared_lock lock(mutex_);
    for (const auto& [digest, bytes] : blobs_) fn(digest, bytes);
}

void Cas::tamper(const ContentId& id, Bytes bytes) {
    std::unique_lock lock(mutex_);
    auto it = blobs_.find(id.digest);
    if (it == blobs_.end()) throw NotFoundError("no content stored for " + id.hex());
    it->second = std::move(bytes);
}

}  // namespace blocka2a
