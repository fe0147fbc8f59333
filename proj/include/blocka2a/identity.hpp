#pragma once

#include <nlohmann/json.hpp>
#include <optional>

#include "blocka2a/cas.hpp"
#include "blocka2a/ledger.hpp"

namespace blocka2a {

// ---------------------------------------------------------------------------
// DID and document model
// ---------------------------------------------------------------------------

struct Did {
    std::string suffix;

    std::string str() const { return "did:blocka2a:" + suffix; }
    auto operator<=>(const Did&) const = default;
};

// Parses did:blocka2a:<suffix>; throws FormatError on anything else.
Did parse_did(const std::string& s);
bool is_valid_did_string(const std::string& s);
// Deterministic DID derived from a public key: base58 of the first 20 bytes
// of its hash.
Did generate_did(BytesView public_key);

struct DidKey {
    std::string id;  // e.g. did:blocka2a:ef24a#key-1
    Scheme scheme{Scheme::Standard};
    Bytes public_key;
    // Aggregatable keys must prove possession at registration so rogue-key
    // aggregation is impossible.
    Bytes possession_proof;
};

struct DidService {
    std::string type;
    std::string endpoint;
};

struct DocumentProof {
    std::string type;
    std::string created;
    std::string verification_method;
    Bytes value;
};

struct DidDocument {
    Did id;
    std::vector<DidKey> public_keys;
    std::vector<DidService> services;
    nlohmann::json capabilities = nlohmann::json::object();
    nlohmann::json policy_constraints = nlohmann::json::object();
    std::optional<DocumentProof> proof;

    const DidKey* find_key(const std::string& key_id) const;
    const DidKey* first_key_of(Scheme scheme) const;
};

nlohmann::json document_to_json(const DidDocument& doc);
DidDocument document_from_json(const nlohmann::json& j);
// Canonical form: UTF-8 JSON, lexicographically sorted keys, no whitespace.
Bytes canonical_document_bytes(const DidDocument& doc);
Digest document_hash(const DidDocument& doc);
// Signature input for the self-signed proof: canonical bytes with the proof
// value blanked.
Bytes document_proof_bytes(const DidDocument& doc);

struct OnChainDidRecord {
    Did did;
    uint64_t version{1};
    Digest doc_hash;
    LedgerTime registered_at;
    bool revocation_status{false};
    std::string controller_address;
};

struct SignedMessage {
    Did sender;
    Bytes payload;
    Signature signature;  // over the payload
    std::string key_id;
};

enum class RejectReason { UnknownSender, Revoked, Integrity, Ownership, Permissions };

struct VerifyDecision {
    bool accepted{false};
    std::optional<RejectReason> reason;
    std::string detail;

    static VerifyDecision accept() { return {true, std::nullopt, ""}; }
    static VerifyDecision reject(RejectReason r, std::string detail) {
        return {false, r, std::move(detail)};
    }
};

std::string_view reject_reason_name(RejectReason r);

// Extra request context consulted by the permissions check: "time" as HH:MM
// for interaction-hour constraints. Missing entries leave a constraint
// unevaluated only if the document does not set it.
using RequestContext = std::map<std::string, std::string>;

// "10MB", "512KiB", "1024" (bytes) and similar.
uint64_t parse_data_size(const std::string& s);
// "09:00-18:00 UTC" daily window; minutes since midnight, inclusive bounds.
bool time_within_daily_window(const std::string& window, const std::string& hhmm);

// ---------------------------------------------------------------------------
// Registry facade over the ledger's DID Registry contract and the CAS
// ---------------------------------------------------------------------------

class DidRegistry {
  public:
    static constexpr const char* kContract = "did_registry";
    static constexpr const char* kNamespace = "did_registry";

    DidRegistry(Ledger& ledger, Cas& cas);

    // Installs the contract handler; done by the constructor, exposed so a
    // replica ledger can be prepared for replay without a facade.
    static void install(Ledger& ledger);

    OnChainDidRecord register_did(const DidDocument& doc, const KeyPair& controller);
    OnChainDidRecord resolve(const Did& did) const;
    DidDocument fetch_document(const Did& did) const;  // throws IntegrityError on hash mismatch

    // Optional resolution cache with a tick TTL; disabled by default so
    // verification always reads the ledger at call time.
    void enable_resolution_cache(uint64_t ttl_ticks);
    void disable_resolution_cache();

    SignedMessage sign_message(const Did& sender, const KeyPair& key, BytesView payload) const;
    VerifyDecision verify_message(const SignedMessage& msg, const std::string& requested_action,
                                  const RequestContext& context = {}) const;

    Ledger& ledger() { return ledger_; }
    Cas& cas() { return cas_; }

    static std::optional<OnChainDidRecord> read_record(const Ledger& ledger, const Did& did);
    static VerifyDecision verify_against(const Ledger& ledger, const Cas& cas, const SignedMessage& msg,
                                         const std::string& requested_action, const RequestContext& context);

  private:
    Ledger& ledger_;
    Cas& cas_;
    struct CacheEntry {
        OnChainDidRecord record;
        uint64_t cached_at;
    };
    std::optional<uint64_t> cache_ttl_;
    mutable std::map<std::string, CacheEntry> cache_;
};

}  // namespace blocka2a
