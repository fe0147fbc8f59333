#pragma once

#include <set>

#include "blocka2a/contracts/acc.hpp"
#include "blocka2a/contracts/agc.hpp"
#include "blocka2a/contracts/ilc.hpp"
#include "blocka2a/provenance.hpp"

namespace blocka2a {

struct ReputationScore {
    Did did;
    double alpha{1.0};
    double beta{1.0};
    LedgerTime last_update;

    double score() const { return alpha / (alpha + beta); }
};

enum class Outcome { Success, Failure };

enum class AlertKind { ByzantineFlag, Tampering, Revocation, Anomaly };

std::string_view alert_kind_name(AlertKind k);

struct Alert {
    std::string id;
    AlertKind kind{AlertKind::Anomaly};
    Did subject;
    std::string reason;
    double confidence{0.0};
    LedgerTime time;
    std::optional<ContentId> evidence_cid;
};

struct EvidenceBundle {
    Did subject;
    std::vector<std::string> on_chain_refs;  // "height:index:kind" event references
    std::vector<ContentId> off_chain_payloads;
    LedgerTime assembled_at;
};

nlohmann::json evidence_to_json(const EvidenceBundle& b);

struct BehaviorBaseline {
    Did did;
    double msg_rate_mean{0.0};
    double msg_rate_stddev{0.0};
    std::map<std::pair<std::string, std::string>, uint64_t> transition_patterns;  // (state, event)
};

enum class AnomalyKind { RateBurst, NovelPattern };

struct AnomalyFinding {
    Did did;
    AnomalyKind kind{AnomalyKind::RateBurst};
    double confidence{0.0};
    std::string detail;
};

struct TamperDecision {
    bool halted{false};
    std::optional<Alert> alert;
};

struct ForensicSpec {
    std::optional<uint64_t> from_height;
    std::optional<uint64_t> to_height;
    std::set<std::string> subjects;  // empty = all
    bool build_graph{true};
};

struct ForensicReport {
    std::vector<LedgerEvent> timeline;
    std::map<std::pair<std::string, std::string>, uint64_t> interaction_edges;  // sender -> receiver
    std::vector<std::pair<std::string, std::string>> contract_trace;            // (contract, event kind)
    std::vector<std::string> warnings;      // tainted-evidence notes
    std::vector<LedgerEvent> tainted_events;  // events whose payload refs fail integrity
};

// Defense Orchestration Engine: reputation, anomaly detection, flagging,
// halting, revocation and forensics over the ledger event stream.
class DefenseEngine {
  public:
    static constexpr const char* kContract = "doe";
    static constexpr const char* kReputationContract = "reputation";

    DefenseEngine(DidRegistry& registry, AgcGovernance& agc, AccessControl& acc, WorkflowContracts& ilc,
                  ProvenanceLedger& provenance, KeyPair service_keys, double decay_lambda = 0.95);

    // Registers the two contracts without constructing an engine, so a
    // replica ledger can replay a journal containing defense transactions.
    static void install_contracts(Ledger& ledger, double decay_lambda);

    // Reputation (Bayesian evidence with multiplicative decay).
    ReputationScore ensure_reputation(const Did& did);
    ReputationScore update_reputation(const Did& did, Outcome outcome);
    ReputationScore reputation(const Did& did) const;  // throws NotFoundError
    std::vector<ReputationScore> all_reputations() const;
    double decay_lambda() const { return lambda_; }

    // Baselines and anomaly detection over [from, to] tick windows.
    std::vector<BehaviorBaseline> build_baselines(uint64_t from_height, uint64_t to_height,
                                                  uint64_t bucket_ticks = 10) const;
    std::vector<AnomalyFinding> detect_anomaly(uint64_t from_height, uint64_t to_height,
                                               const std::vector<BehaviorBaseline>& baselines,
                                               double z = 3.0, uint64_t bucket_ticks = 10) const;

    // Anchors anomaly findings as on-chain alerts.
    std::vector<Alert> alert_anomalies(const std::vector<AnomalyFinding>& findings);

    // Counter-attack algorithms.
    std::vector<Alert> flag_byzantine(double tau);
    TamperDecision halt_on_tamper(BytesView received, const Did& sender, const Digest& expected_hash,
                                  const Digest& task_hash);
    std::vector<Digest> revoke_permissions(const Did& did, uint64_t from_height, uint64_t to_height,
                                           bool threat_signal);
    void throttle(const std::string& instance_id, const Did& did, uint64_t until_height);
    void unhalt_task(const Digest& task_hash);

    ForensicReport forensic_query(const ForensicSpec& spec) const;

    std::vector<Alert> alerts() const;
    const KeyPair& service_keys() const { return service_keys_; }

  private:
    Alert submit_alert(AlertKind kind, const Did& subject, const std::string& reason, double confidence,
                       std::optional<ContentId> evidence);
    EvidenceBundle assemble_evidence(const Did& subject) const;

    DidRegistry& registry_;
    AgcGovernance& agc_;
    AccessControl& acc_;
    WorkflowContracts& ilc_;
    ProvenanceLedger& provenance_;
    KeyPair service_keys_;
    double lambda_;
};

}  // namespace blocka2a
