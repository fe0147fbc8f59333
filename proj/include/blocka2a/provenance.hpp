#pragma once

#include "blocka2a/contracts/common.hpp"

namespace blocka2a {

// ---------------------------------------------------------------------------
// Task lifecycle
// ---------------------------------------------------------------------------

struct TaskMetadata {
    Did initiator;
    std::vector<Did> participants;
    std::string description;
    uint64_t deadline{0};  // logical timestamp
};

// H_task over the length-prefixed encoding of (initiator, participants,
// description, t). The deadline is carried in metadata but not hashed.
Digest task_hash_of(const TaskMetadata& meta, uint64_t t);

Bytes milestone_signing_bytes(const Digest& task_hash, const std::string& milestone);
bool milestone_label_ok(const std::string& label);  // [A-Za-z0-9_-]{1,64}

struct TaskRecord {
    Digest task_hash;
    LedgerTime created_at;
    std::string status;
    std::vector<std::pair<std::string, LedgerTime>> status_history;
    ContentId metadata_cid;
    Did initiator;
    std::vector<Did> participants;
};

struct AnchorRecord {
    Digest payload_hash;
    ContentId content_id;
    LedgerTime anchored_at;
    std::string status;  // always "anchored"
};

struct ImportRecord {
    Digest data_hash;
    std::string source_id;
    uint64_t time{0};
    std::string predicate_attestation;
    Signature oracle_signature;
    Did requester;
};

// ---------------------------------------------------------------------------
// Authenticated import participants (mock source + oracle)
// ---------------------------------------------------------------------------

struct EncryptedResponse {
    Bytes ciphertext;
    Bytes nonce;
};

// Stand-in for an external authenticated data provider. Holds an identity
// key for its certificate and a DH key for the retrieval channel.
class MockDataSource {
  public:
    MockDataSource(std::string source_id, nlohmann::json response, BytesView seed);

    const std::string& id() const { return id_; }
    const Bytes& identity_public() const { return identity_.public_key; }
    Bytes certificate() const;  // identity signature over the source id
    Bytes dh_public() const;    // DH share, compressed group element

    // Derives the joint key from the requester+oracle share and returns the
    // AEAD-sealed response.
    EncryptedResponse respond(BytesView joint_share) const;

    void set_response(nlohmann::json response) { response_ = std::move(response); }

  private:
    std::string id_;
    nlohmann::json response_;
    KeyPair identity_;
    Bytes dh_secret_;
};

class ImportOracle {
  public:
    explicit ImportOracle(BytesView seed);
    const Bytes& attestation_public() const { return attestation_.public_key; }
    const KeyPair& attestation_keys() const { return attestation_; }

  private:
    KeyPair attestation_;
};

Bytes import_attestation_bytes(const Digest& data_hash, const std::string& predicate_statement, uint64_t t);

// ---------------------------------------------------------------------------
// Provenance contract facade
// ---------------------------------------------------------------------------

class ProvenanceLedger {
  public:
    static constexpr const char* kContract = "provenance";

    explicit ProvenanceLedger(DidRegistry& registry);
    static void install(Ledger& ledger, const Cas& cas);

    void configure_oracle(const ImportOracle& oracle, const KeyPair& admin);

    TaskRecord initiate_task(const TaskMetadata& meta, const KeyPair& initiator_keys);
    TaskRecord transition_state(const Digest& task_hash, const std::string& milestone,
                                const std::vector<std::pair<Did, Signature>>& signatures,
                                const KeyPair& submitter);
    TaskRecord task(const Digest& task_hash) const;

    AnchorRecord anchor_data(BytesView payload, const KeyPair& submitter);
    bool verify_anchor(BytesView payload, LedgerTime as_of) const;
    std::optional<AnchorRecord> anchor_record(const Digest& payload_hash) const;

    // Simplified three-phase import: source authentication, AEAD retrieval
    // over a jointly-derived key, oracle predicate attestation, anchoring.
    ImportRecord authenticated_import(const Did& requester, const MockDataSource& source,
                                      const ImportOracle& oracle, const JsonClause& predicate,
                                      const KeyPair& submitter, uint64_t exchange_seed,
                                      const std::function<void(Bytes&)>& channel_interceptor = nullptr);

    // Anchors a message interaction (sender, recipient, content hash). When
    // claims_anchored is set the payload asserts anchored provenance, so
    // forensic sweeps integrity-check it against the anchor store.
    void record_message(const Did& sender, const Did& recipient, const Digest& content_hash,
                        const KeyPair& submitter, bool claims_anchored = false);

    Ledger& ledger() { return registry_.ledger(); }

  private:
    DidRegistry& registry_;
};

}  // namespace blocka2a
