#pragma once

#include "blocka2a/provenance.hpp"

namespace blocka2a {

// A2A-style agent card: the MAS-side identity record mapped into the fabric.
struct AgentCard {
    std::string name;
    std::string url;
    std::vector<std::string> skills;
    std::string provider;
};

AgentCard agent_card_from_json(const nlohmann::json& j);
nlohmann::json agent_card_to_json(const AgentCard& c);

// MAS-side task record (id, context id, status, participants by card name).
struct MasTask {
    std::string id;
    std::string context_id;
    std::string status;
    std::string description;
    std::string client;               // card name
    std::vector<std::string> servers;  // card names
    uint64_t deadline_ticks{100};
};

struct AdaptedAgent {
    AgentCard card;
    Did did;
    KeyPair msg_keys;
    KeyPair agg_keys;
    DidDocument document;
};

struct MessageOutcome {
    SignedMessage message;
    VerifyDecision decision;
    Digest content_hash;
};

// The transformation suite: identity mapping, metadata transformation and
// protocol translation onto ledger transactions.
class MasAdapter {
  public:
    MasAdapter(DidRegistry& registry, ProvenanceLedger& provenance, uint64_t seed);

    // Identity mapping: injective card -> DID + document + registration.
    const AdaptedAgent& adapt_identity(const AgentCard& card);
    const AdaptedAgent& agent(const std::string& card_name) const;
    bool has_agent(const std::string& card_name) const;
    std::vector<std::string> agent_names() const;

    // Metadata transformation: MAS task -> fabric task metadata. The MAS
    // context id travels inside the description metadata.
    TaskMetadata adapt_task(const MasTask& task) const;

    // Protocol translation: message/send becomes a verified, anchored
    // interaction; status updates become state-transition transactions.
    // claims_anchored marks payloads asserting anchored (prompt) provenance.
    MessageOutcome send_message(const std::string& from, const std::string& to, BytesView content,
                                const std::string& action = "write", bool claims_anchored = false);
    TaskRecord record_task(const MasTask& task);
    TaskRecord update_task_status(const Digest& task_hash, const std::string& milestone,
                                  const std::vector<std::string>& signer_names);

    // Delivers a pre-built message as-is (the interception path in attack
    // scenarios) and anchors the attempt.
    MessageOutcome deliver_raw(const SignedMessage& msg, const std::string& recipient_name,
                               const std::string& action = "write", bool claims_anchored = false);

    const std::vector<MessageOutcome>& message_log() const { return log_; }

  private:
    DidRegistry& registry_;
    ProvenanceLedger& provenance_;
    uint64_t seed_;
    std::map<std::string, AdaptedAgent> agents_;
    std::vector<MessageOutcome> log_;
};

// Trust-preservation checks run over a completed adapted run.
struct TrustEquivalenceReport {
    bool authenticity{false};   // every honest adapted message verifies
    bool integrity{false};      // every anchored task hash recomputes
    bool accountability{false}; // every event's dids resolve on the registry
    std::vector<std::string> violations;
};

TrustEquivalenceReport check_trust_equivalence(DidRegistry& registry, ProvenanceLedger& provenance,
                                               const MasAdapter& adapter);

}  // namespace blocka2a
