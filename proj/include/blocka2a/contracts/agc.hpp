#pragma once

#include "blocka2a/contracts/common.hpp"
#include "blocka2a/merkle.hpp"

namespace blocka2a {

enum class AgcState { Created, Active, Revoked };

std::string_view agc_state_name(AgcState s);
AgcState agc_state_from_name(std::string_view s);

struct AgcController {
    Did did;
    Bytes public_key;  // standard scheme
};

struct AgcRecord {
    Did did;
    AgcState state{AgcState::Created};
    Digest root_hash;
    std::vector<AgcController> controllers;
    uint32_t quorum_k{1};
    LedgerTime valid_from;
    std::optional<LedgerTime> valid_until;  // unbounded when absent
    std::string annotation;                 // defense engine status notes
    std::vector<std::string> state_trace;   // ordered lifecycle labels
};

struct ControllerApproval {
    Did controller;
    Signature signature;  // over agc_update_signing_bytes
};

Bytes agc_update_signing_bytes(const Did& did, const Digest& new_doc_hash);

struct AgcResolution {
    Digest root_hash;
    AgcState state;
    LedgerTime valid_from;
    std::optional<LedgerTime> valid_until;
    Digest commitment_root;  // AGC state commitment at resolution time
    MerkleProof proof;       // proves (did -> root_hash) against commitment_root
};

// Agent Governance Contract: DID lifecycle root of trust.
class AgcGovernance {
  public:
    static constexpr const char* kContract = "agc";

    // The admin credential authorizes revocations and halts.
    AgcGovernance(DidRegistry& registry, KeyPair admin_keys);
    static void install(Ledger& ledger);

    AgcRecord register_agent(const Did& did, const Digest& doc_hash,
                             const std::vector<AgcController>& controllers, uint32_t quorum_k,
                             const KeyPair& submitter);
    // Stores the new document, then applies the quorum-checked update and
    // bumps the identity-layer record version.
    AgcRecord update(const Did& did, const DidDocument& new_doc,
                     const std::vector<ControllerApproval>& approvals, const KeyPair& submitter);
    AgcRecord revoke(const Did& did, const KeyPair& revoker);
    AgcRecord record(const Did& did) const;
    AgcResolution resolve(const Did& did) const;

    std::vector<std::pair<std::string, std::string>> capability_bindings(const Did& did) const;

    const KeyPair& admin_keys() const { return admin_keys_; }
    std::string admin_address() const;

    static Bytes commitment_leaf(const std::string& did_str, const Digest& root_hash);

  private:
    DidRegistry& registry_;
    KeyPair admin_keys_;
};

}  // namespace blocka2a
