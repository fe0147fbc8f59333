#pragma once

#include "blocka2a/contracts/common.hpp"

namespace blocka2a {

// Guard on a workflow state's outgoing transitions: signer quorum, time
// window, task-hash consistency and payload predicates.
struct GuardSpec {
    uint32_t quorum_k{0};  // 0 means every participant must sign
    std::optional<std::pair<uint64_t, uint64_t>> time_window;  // [start, end] ticks
    std::optional<Digest> required_task;
    std::vector<JsonClause> payload_clauses;
};

struct WorkflowTransition {
    std::string from;
    std::string event;
    std::string to;
};

struct WorkflowMachine {
    std::vector<std::string> states;
    std::string initial;
    std::vector<WorkflowTransition> transitions;
    std::map<std::string, GuardSpec> guards;  // keyed by source state
};

// Throws ValidationError on nondeterministic or dangling machines.
void validate_machine(const WorkflowMachine& m);
nlohmann::json machine_to_json(const WorkflowMachine& m);
WorkflowMachine machine_from_json(const nlohmann::json& j);

struct EventEndorsement {
    Did signer;
    Signature signature;  // aggregatable scheme
};

Bytes ilc_event_signing_bytes(const std::string& instance_id, const std::string& current_state,
                              const std::string& event);

struct TransitionRecord {
    std::string from;
    std::string event;
    std::string to;
    LedgerTime time;
};

struct WorkflowInstance {
    std::string id;
    WorkflowMachine machine;
    std::vector<Did> participants;
    std::string current;
    bool halted{false};
    std::map<std::string, uint64_t> suspended_until;  // did -> tick
    std::optional<Digest> attached_task;
};

class WorkflowContracts {
  public:
    static constexpr const char* kContract = "ilc";

    explicit WorkflowContracts(DidRegistry& registry);
    static void install(Ledger& ledger, const Cas& cas);

    std::string deploy(const WorkflowMachine& machine, const std::vector<Did>& participants,
                       const KeyPair& submitter, std::optional<Digest> attached_task = std::nullopt);

    // Returns the new state; throws Guard/Transition/Halt/Membership errors.
    std::string submit_event(const std::string& instance_id, const std::string& event,
                             const nlohmann::json& payload, const std::vector<EventEndorsement>& signatures,
                             const KeyPair& submitter);

    void halt(const std::string& instance_id, const KeyPair& authority);
    void unhalt(const std::string& instance_id, const KeyPair& admin);
    void suspend(const std::string& instance_id, const Did& did, uint64_t until_height,
                 const KeyPair& authority);

    WorkflowInstance instance(const std::string& instance_id) const;
    std::vector<TransitionRecord> transition_log(const std::string& instance_id) const;
    // Finds instances whose guard chain references the given task hash.
    std::vector<std::string> instances_for_task(const Digest& task_hash) const;

    // Re-verifies every archived transition's quorum against the recorded
    // signatures and timestamps; returns false if any fails.
    bool audit_transitions(const std::string& instance_id) const;

  private:
    DidRegistry& registry_;
};

}  // namespace blocka2a
