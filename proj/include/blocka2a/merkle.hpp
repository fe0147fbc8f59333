#pragma once

#include <vector>

#include "blocka2a/digest.hpp"

namespace blocka2a {

struct MerkleCommitment {
    Digest root;
    size_t leaf_count{0};
};

struct MerkleProof {
    size_t leaf_index{0};
    size_t leaf_count{0};
    // Sibling digest plus its side: true when the sibling sits on the right.
    std::vector<std::pair<Digest, bool>> path;
};

struct MerkleTree {
    MerkleCommitment commitment;
    std::vector<MerkleProof> proofs;  // one per leaf, in leaf order
};

// Leaves are hashed with tag 0x00, interior nodes with 0x01; an odd node is
// paired with itself. The empty commitment is hash of the empty string.
MerkleTree merkle_commit(const std::vector<Bytes>& leaves);
bool merkle_verify(const Digest& root, BytesView leaf, const MerkleProof& proof);

Digest merkle_leaf_hash(BytesView leaf);

}  // namespace blocka2a
