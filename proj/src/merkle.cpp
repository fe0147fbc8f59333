#include "blocka2a/merkle.hpp"

#include "blocka2a/errors.hpp"

namespace blocka2a {

namespace {

Digest node_hash(const Digest& left, const Digest& right) {
    Bytes buf;
    buf.reserve(65);
    buf.push_back(0x01);
    buf.insert(buf.end(), left.bytes.begin(), left.bytes.end());
    buf.insert(buf.end(), right.bytes.begin(), right.bytes.end());
    return sha256(buf);
}

}  // namespace

Digest merkle_leaf_hash(BytesView leaf) {
    Bytes buf;
    buf.reserve(leaf.size() + 1);
    buf.push_back(0x00);
    buf.insert(buf.end(), leaf.begin(), leaf.end());
    return sha256(buf);
}

MerkleTree merkle_commit(const std::vector<Bytes>& leaves) {
    MerkleTree tree;
    tree.commitment.leaf_count = leaves.size();
    if (leaves.empty()) {
        tree.commitment.root = sha256(Bytes{});
        return tree;
    }

    std::vector<Digest> level;
    level.reserve(leaves.size());
    for (const auto& leaf : leaves) level.push_back(merkle_leaf_hash(leaf));

    tree.proofs.resize(leaves.size());
    for (size_t i = 0; i < leaves.size(); i++) {
        tree.proofs[i].leaf_index = i;
        tree.proofs[i].leaf_count = leaves.size();
    }

    // cursor[i] tracks which node of the current level leaf i sits under
    std::vector<size_t> cursor(leaves.size());
    for (size_t i = 0; i < leaves.size(); i++) cursor[i] = i;

    while (level.size() > 1) {
        std::vector<Digest> next;
        next.reserve((level.size() + 1) / 2);
        for (size_t i = 0; i < level.size(); i += 2) {
            const Digest& left = level[i];
            const Digest& right = (i + 1 < level.size()) ? level[i + 1] : level[i];
            next.push_back(node_hash(left, right));
        }
        for (size_t leaf = 0; leaf < leaves.size(); leaf++) {
            size_t pos = cursor[leaf];
            size_t sibling = (pos % 2 == 0) ? pos + 1 : pos - 1;
            if (sibling >= level.size()) sibling = pos;  // duplicated last node
            tree.proofs[leaf].path.emplace_back(level[sibling], pos % 2 == 0);
            cursor[leaf] = pos / 2;
        }
        level = std::move(next);
    }
    tree.commitment.root = level[0];
    return tree;
}

bool merkle_verify(const Digest& root, BytesView leaf, const MerkleProof& proof) {
    if (proof.leaf_count == 0) return false;
    if (proof.leaf_index >= proof.leaf_count) throw DecodeError("merkle proof index out of range");
    // Height consistency: ceil(log2(leaf_count)) levels for multi-leaf trees.
    size_t expected = 0;
    for (size_t n = proof.leaf_count; n > 1; n = (n + 1) / 2) expected++;
    if (proof.path.size() != expected) throw DecodeError("merkle proof has the wrong path length");

    Digest acc = merkle_leaf_hash(leaf);
    for (const auto& [sibling, sibling_on_right] : proof.path) {
        acc = sibling_on_right ? node_hash(acc, sibling) : node_hash(sibling, acc);
    }
    return acc == root;
}

}  // namespace blocka2a
