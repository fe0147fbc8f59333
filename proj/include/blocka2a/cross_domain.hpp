#pragma once

#include "blocka2a/contracts/common.hpp"

namespace blocka2a {

// ---------------------------------------------------------------------------
// Cross-chain trust anchors
// ---------------------------------------------------------------------------

struct AnchorStoreEntry {
    Digest doc_hash;
    std::string source_chain;
    LedgerTime block_number;  // source-chain registration height
    LedgerTime relayed_at;    // destination-chain height
};

// In-process bridge between two ledger instances. Relay validates the source
// record exists at its stated block, then writes the destination anchor.
class TrustAnchorBridge {
  public:
    static constexpr const char* kContract = "trust_anchor";

    static void install(Ledger& ledger);

    static AnchorStoreEntry relay_anchor(Ledger& source, Ledger& dest, const Did& did,
                                         const KeyPair& submitter);
    static std::optional<AnchorStoreEntry> anchor_entry(const Ledger& dest, const Digest& doc_hash,
                                                        const std::string& source_chain);
    // verifySig(doc) ∧ hash(doc) anchored ∧ freshness within tau_max ticks.
    static bool validate_cross_chain(const Ledger& dest, const DidDocument& doc, const Signature& sig,
                                     LedgerTime now, uint64_t tau_max, std::string* why = nullptr);
};

Bytes cross_chain_document_signing_bytes(const DidDocument& doc);

// ---------------------------------------------------------------------------
// Legacy registry, oracle, migration committee
// ---------------------------------------------------------------------------

enum class LegacyStatusKind { Active, Migrated, Revoked, Archived };

struct LegacyStatus {
    LegacyStatusKind kind{LegacyStatusKind::Active};
    std::optional<Did> redirect;  // set when Migrated
};

class LegacyRegistry {
  public:
    void load_json(const nlohmann::json& id_to_attributes);
    void load_file(const std::string& path);
    void add(const std::string& legacy_id, std::map<std::string, std::string> attributes);

    bool contains(const std::string& legacy_id) const;
    const std::map<std::string, std::string>& attributes(const std::string& legacy_id) const;
    LegacyStatus lookup(const std::string& legacy_id) const;  // throws NotFoundError
    LegacyStatus decommission(const std::string& legacy_id, LegacyStatusKind kind,
                              std::optional<Did> redirect = std::nullopt);

  private:
    struct Entry {
        std::map<std::string, std::string> attributes;
        LegacyStatus status;
    };
    std::map<std::string, Entry> entries_;
};

struct OracleAttestation {
    std::string legacy_id;
    std::map<std::string, std::string> attributes;
    uint64_t timestamp{0};
    Signature oracle_signature;
};

Bytes attestation_signing_bytes(const std::string& legacy_id,
                                const std::map<std::string, std::string>& attributes);

class LegacyOracle {
  public:
    LegacyOracle(LegacyRegistry& registry, BytesView seed);
    OracleAttestation attest(const std::string& legacy_id, uint64_t timestamp) const;
    const Bytes& public_key() const { return keys_.public_key; }
    bool verify_attestation(const OracleAttestation& att) const;

  private:
    LegacyRegistry& registry_;
    KeyPair keys_;
};

// t-of-n aggregatable-signature committee.
class MigrationCommittee {
  public:
    MigrationCommittee(size_t n, size_t t, BytesView seed);

    size_t size() const { return members_.size(); }
    size_t threshold() const { return threshold_; }
    std::vector<Bytes> public_keys() const;

    struct QuorumSignature {
        AggregateSignature aggregate;
        std::vector<uint32_t> signer_indices;
    };
    // Signs with the given member subset (defaults to the first t members).
    QuorumSignature sign_quorum(BytesView message, std::vector<uint32_t> indices = {}) const;
    bool verify_quorum(BytesView message, const QuorumSignature& sig) const;

  private:
    std::vector<KeyPair> members_;
    size_t threshold_;
};

struct MasterCredential {
    Did did;
    std::string legacy_id;
    std::map<std::string, std::string> attributes;
    std::string issuer;
    uint64_t timestamp{0};
    MigrationCommittee::QuorumSignature committee_signature;
    MigrationCommittee::QuorumSignature sybil_proof;
};

nlohmann::json credential_to_json(const MasterCredential& mc);
MasterCredential credential_from_json(const nlohmann::json& j);
Bytes credential_signing_bytes(const MasterCredential& mc);
Bytes sybil_statement_bytes(const Did& did, const std::string& legacy_id);

// Jaccard index over normalized (key, value) pairs.
double attribute_similarity(const std::map<std::string, std::string>& a,
                            const std::map<std::string, std::string>& b);

struct Presentation {
    Did context_did;
    Did master_did;
    std::map<std::string, std::string> disclosed;
    Digest linkage_commitment;  // hash(salt || canonical credential bytes)
    Bytes salt;
    Signature agent_signature;
};

Bytes presentation_signing_bytes(const Presentation& p);

class MigrationService {
  public:
    static constexpr const char* kContract = "migration";

    MigrationService(DidRegistry& registry, MigrationCommittee& committee, LegacyOracle& oracle,
                     LegacyRegistry& legacy, double similarity_threshold = 0.9);
    static void install(Ledger& ledger);

    MasterCredential migrate_legacy(const std::string& legacy_id, const KeyPair& agent_key,
                                    const KeyPair& submitter);
    bool verify_credential(const MasterCredential& mc) const;

    Presentation derive_context_did(const MasterCredential& mc, const std::vector<std::string>& disclosed_fields,
                                    const KeyPair& agent_key, uint64_t salt_seed) const;
    bool verify_presentation(const Presentation& p, std::string* why = nullptr) const;

    LegacyStatus decommission_legacy(const std::string& legacy_id, LegacyStatusKind kind,
                                     std::optional<Did> redirect = std::nullopt);

    std::vector<MasterCredential> anchored_credentials() const;
    double similarity_threshold() const { return threshold_; }

  private:
    DidRegistry& registry_;
    MigrationCommittee& committee_;
    LegacyOracle& oracle_;
    LegacyRegistry& legacy_;
    double threshold_;
};

}  // namespace blocka2a
