#pragma once

#include "blocka2a/contracts/common.hpp"

namespace blocka2a {

// Environment snapshot supplied with authorization requests: request time,
// threat level and any other ambient signals policies predicate on.
using Environment = std::map<std::string, std::string>;

Digest environment_snapshot_hash(const Environment& env);

struct TimeWindowClause {
    std::optional<std::string> daily;  // "09:00-17:00", evaluated against env "time"
    std::optional<std::pair<uint64_t, uint64_t>> absolute;  // ledger tick range
};

struct EnvClause {
    std::string key;
    Comparator cmp{Comparator::Eq};
    std::string literal;
};

// Conjunction of DID-attribute, temporal and environment predicates bound to
// one (resource, action) pair.
struct AccessPolicy {
    std::string resource;
    Action action{Action::Read};
    std::vector<JsonClause> did_clauses;
    std::vector<TimeWindowClause> time_clauses;
    std::vector<EnvClause> env_clauses;
    bool context_free_tokens{false};

    bool evaluate(const nlohmann::json& did_document, LedgerTime now, const Environment& env,
                  std::string* failing = nullptr) const;
};

AccessPolicy access_policy_from_json(const nlohmann::json& j);
nlohmann::json access_policy_to_json(const AccessPolicy& p);

struct CapabilityToken {
    Did holder;
    Action action{Action::Read};
    std::string resource;
    LedgerTime expiry;
    Digest context_snapshot;
    bool context_free{false};
    Signature issuer_signature;
};

Bytes token_signing_bytes(const CapabilityToken& t);
nlohmann::json token_to_json(const CapabilityToken& t);
CapabilityToken token_from_json(const nlohmann::json& j);

struct AuthorizationOutcome {
    bool granted{false};
    std::optional<CapabilityToken> token;
    std::string denial_reason;
};

// Namespace constants shared with the governance contract.
struct AgcNames {
    static constexpr const char* kContract = "agc";
};

class AccessControl {
  public:
    static constexpr const char* kContract = "acc";

    AccessControl(DidRegistry& registry, KeyPair acc_keys, uint64_t token_ttl = 300);
    static void install(Ledger& ledger, const Cas& cas, Bytes acc_public_key, Bytes acc_secret,
                        uint64_t token_ttl);

    void deploy_policy(const AccessPolicy& policy, const KeyPair& admin);
    AuthorizationOutcome authorize(const Did& requester, Action action, const std::string& resource,
                                   const Environment& env, const KeyPair& submitter);
    bool verify_token(const CapabilityToken& token, LedgerTime now, const Environment& env) const;

    const Bytes& issuer_public_key() const { return acc_keys_.public_key; }
    uint64_t token_ttl() const { return token_ttl_; }

  private:
    DidRegistry& registry_;
    KeyPair acc_keys_;
    uint64_t token_ttl_;
};

}  // namespace blocka2a
