#include "blocka2a/contracts/ilc.hpp"

#include <algorithm>
#include <set>

#include "blocka2a/bls/bls.hpp"
#include "blocka2a/errors.hpp"

namespace blocka2a {

using nlohmann::json;

void validate_machine(const WorkflowMachine& m) {
    if (m.states.empty()) throw ValidationError("invalid machine: empty state set");
    std::set<std::string> states(m.states.begin(), m.states.end());
    if (states.size() != m.states.size()) throw ValidationError("invalid machine: duplicate states");
    if (!states.contains(m.initial)) throw ValidationError("invalid machine: initial state not in state set");
    std::set<std::pair<std::string, std::string>> keys;
    for (const auto& t : m.transitions) {
        if (!states.contains(t.from))
            throw ValidationError("invalid machine: transition from unknown state " + t.from);
        if (!states.contains(t.to))
            throw ValidationError("invalid machine: transition targets unknown state " + t.to);
        if (!keys.insert({t.from, t.event}).second)
            throw ValidationError("invalid machine: duplicate transition for (" + t.from + ", " + t.event + ")");
    }
    for (const auto& [state, guard] : m.guards) {
        if (!states.contains(state)) throw ValidationError("invalid machine: guard on unknown state " + state);
        (void)guard;
    }
}

json machine_to_json(const WorkflowMachine& m) {
    json j;
    j["states"] = m.states;
    j["initial"] = m.initial;
    j["transitions"] = json::array();
    for (const auto& t : m.transitions)
        j["transitions"].push_back({{"from", t.from}, {"event", t.event}, {"to", t.to}});
    j["guards"] = json::object();
    for (const auto& [state, g] : m.guards) {
        json gj;
        gj["quorum_k"] = g.quorum_k;
        if (g.time_window) gj["time_window"] = json::array({g.time_window->first, g.time_window->second});
        if (g.required_task) gj["required_task"] = g.required_task->hex();
        gj["payload_clauses"] = json::array();
        for (const auto& c : g.payload_clauses) gj["payload_clauses"].push_back(clause_to_json(c));
        j["guards"][state] = gj;
    }
    return j;
}

WorkflowMachine machine_from_json(const json& j) {
    WorkflowMachine m;
    m.states = j.at("states").get<std::vector<std::string>>();
    m.initial = j.at("initial").get<std::string>();
    for (const auto& t : j.value("transitions", json::array())) {
        m.transitions.push_back(
            {t.at("from").get<std::string>(), t.at("event").get<std::string>(), t.at("to").get<std::string>()});
    }
    const json guards = j.value("guards", json::object());
    for (const auto& [state, gj] : guards.items()) {
        GuardSpec g;
        g.quorum_k = gj.value("quorum_k", 0u);
        if (gj.contains("time_window"))
            g.time_window = std::pair<uint64_t, uint64_t>{gj.at("time_window")[0].get<uint64_t>(),
                                                          gj.at("time_window")[1].get<uint64_t>()};
        if (gj.contains("required_task"))
            g.required_task = Digest::from_hex_str(gj.at("required_task").get<std::string>());
        for (const auto& c : gj.value("payload_clauses", json::array()))
            g.payload_clauses.push_back(clause_from_json(c));
        m.guards[state] = std::move(g);
    }
    return m;
}

Bytes ilc_event_signing_bytes(const std::string& instance_id, const std::string& current_state,
                              const std::string& event) {
    Bytes buf;
    append_field(buf, std::string_view("ilc-event"));
    append_field(buf, instance_id);
    append_field(buf, current_state);
    append_field(buf, event);
    return buf;
}

namespace {

std::string instance_key(const std::string& id) { return "instance/" + id; }

json instance_to_json(const WorkflowInstance& inst) {
    json j;
    j["id"] = inst.id;
    j["machine"] = machine_to_json(inst.machine);
    j["participants"] = json::array();
    for (const auto& p : inst.participants) j["participants"].push_back(p.str());
    j["current"] = inst.current;
    j["halted"] = inst.halted;
    j["suspended_until"] = inst.suspended_until;
    if (inst.attached_task) j["attached_task"] = inst.attached_task->hex();
    return j;
}

WorkflowInstance instance_from_json(const json& j) {
    WorkflowInstance inst;
    inst.id = j.at("id").get<std::string>();
    inst.machine = machine_from_json(j.at("machine"));
    for (const auto& p : j.at("participants")) inst.participants.push_back(parse_did(p.get<std::string>()));
    inst.current = j.at("current").get<std::string>();
    inst.halted = j.at("halted").get<bool>();
    inst.suspended_until = j.value("suspended_until", std::map<std::string, uint64_t>{});
    if (j.contains("attached_task"))
        inst.attached_task = Digest::from_hex_str(j.at("attached_task").get<std::string>());
    return inst;
}

bool submitter_is_admin(ContractContext& ctx) {
    auto admin = ctx.get("agc", "_admin");
    return admin && ctx.submitter_address() == *admin;
}

void ilc_handler(ContractContext& ctx, const Cas& cas) {
    json p = json::parse(to_string(BytesView(ctx.payload().data(), ctx.payload().size())));
    std::string op = p.at("op").get<std::string>();

    if (op == "deploy") {
        WorkflowMachine machine = machine_from_json(p.at("machine"));
        validate_machine(machine);
        WorkflowInstance inst;
        uint64_t counter = 0;
        if (auto raw = ctx.get(WorkflowContracts::kContract, "_counter")) counter = std::stoull(*raw);
        inst.id = "wf-" + std::to_string(counter + 1);
        ctx.put(WorkflowContracts::kContract, "_counter", std::to_string(counter + 1));
        inst.machine = machine;
        for (const auto& d : p.at("participants")) {
            Did did = parse_did(d.get<std::string>());
            if (!ctx.get(DidRegistry::kNamespace, did.str()))
                throw ParticipantError("participant not registered: " + did.str());
            inst.participants.push_back(did);
        }
        inst.current = machine.initial;
        if (p.contains("attached_task"))
            inst.attached_task = Digest::from_hex_str(p.at("attached_task").get<std::string>());
        ctx.put(WorkflowContracts::kContract, instance_key(inst.id), instance_to_json(inst).dump());
        ctx.emit("WorkflowDeployed", {{"instance", inst.id}, {"initial", inst.current}});
        return;
    }

    std::string id = p.at("instance").get<std::string>();
    auto raw = ctx.get(WorkflowContracts::kContract, instance_key(id));
    if (!raw) throw NotFoundError("workflow instance not found: " + id);
    WorkflowInstance inst = instance_from_json(json::parse(*raw));

    if (op == "fire") {
        if (inst.halted) throw HaltError("halt error: workflow " + id + " is halted");
        std::string event = p.at("event").get<std::string>();
        json payload = p.value("payload", json::object());

        const WorkflowTransition* transition = nullptr;
        for (const auto& t : inst.machine.transitions) {
            if (t.from == inst.current && t.event == event) {
                transition = &t;
                break;
            }
        }
        if (!transition)
            throw TransitionError("undefined transition from " + inst.current + " on " + event);

        // collect valid participant endorsements over (instance, state, event)
        Bytes msg = ilc_event_signing_bytes(id, inst.current, event);
        std::set<std::string> valid_signers;
        for (const auto& s : p.value("signatures", json::array())) {
            Did signer = parse_did(s.at("did").get<std::string>());
            bool is_participant =
                std::any_of(inst.participants.begin(), inst.participants.end(),
                            [&](const Did& d) { return d == signer; });
            if (!is_participant)
                throw MembershipError("membership error: signer is not a participant: " + signer.str());
            auto until = inst.suspended_until.find(signer.str());
            if (until != inst.suspended_until.end() && ctx.now().logical_timestamp < until->second)
                throw GuardError("guard error: signer " + signer.str() + " is rate-limited until tick " +
                                 std::to_string(until->second));

            auto rec_raw = ctx.get(DidRegistry::kNamespace, signer.str());
            if (!rec_raw) continue;
            json rec = json::parse(*rec_raw);
            if (rec.at("revocation_status").get<bool>()) continue;
            Bytes doc_bytes = cas.get(ContentId{Digest::from_hex_str(rec.at("doc_hash").get<std::string>())});
            DidDocument doc = document_from_json(json::parse(to_string(doc_bytes)));
            const DidKey* key = doc.first_key_of(Scheme::Aggregatable);
            if (!key) continue;
            Signature sig{Scheme::Aggregatable, from_hex(s.at("sig").get<std::string>())};
            if (verify(Scheme::Aggregatable, BytesView(key->public_key.data(), key->public_key.size()),
                       BytesView(msg.data(), msg.size()), sig)) {
                valid_signers.insert(signer.str());
            }
        }

        auto git = inst.machine.guards.find(inst.current);
        GuardSpec guard = (git != inst.machine.guards.end()) ? git->second : GuardSpec{};
        size_t required = guard.quorum_k == 0 ? inst.participants.size() : guard.quorum_k;
        if (valid_signers.size() < required)
            throw GuardError("guard error: quorum " + std::to_string(valid_signers.size()) + " of " +
                             std::to_string(required) + " required signatures");
        if (guard.time_window) {
            uint64_t now = ctx.now().logical_timestamp;
            if (now < guard.time_window->first || now > guard.time_window->second)
                throw GuardError("guard error: outside time window [" +
                                 std::to_string(guard.time_window->first) + ", " +
                                 std::to_string(guard.time_window->second) + "]");
        }
        if (guard.required_task) {
            if (!payload.contains("task_hash") ||
                payload.at("task_hash").get<std::string>() != guard.required_task->hex())
                throw GuardError("guard error: task hash mismatch");
            if (!ctx.get("provenance", "task/" + guard.required_task->hex()))
                throw GuardError("guard error: task hash not anchored on chain");
        }
        for (const auto& clause : guard.payload_clauses) {
            if (!clause.evaluate(payload))
                throw GuardError("guard error: payload clause on " + clause.path);
        }

        std::string from = inst.current;
        inst.current = transition->to;
        ctx.put(WorkflowContracts::kContract, instance_key(id), instance_to_json(inst).dump());

        json log = json::array();
        if (auto lraw = ctx.get(WorkflowContracts::kContract, "log/" + id)) log = json::parse(*lraw);
        json entry{{"from", from},
                   {"event", event},
                   {"to", inst.current},
                   {"time", ctx.now().logical_timestamp},
                   {"payload", payload},
                   {"signatures", p.value("signatures", json::array())}};
        log.push_back(entry);
        ctx.put(WorkflowContracts::kContract, "log/" + id, log.dump());

        ctx.emit("TransitionEvent", {{"instance", id},
                                     {"from", from},
                                     {"event", event},
                                     {"to", inst.current},
                                     {"sender", ctx.tx().submitter},
                                     {"signers", std::to_string(valid_signers.size())}});
        return;
    }

    if (op == "halt") {
        if (!ctx.is_internal_call() && !submitter_is_admin(ctx))
            throw AuthError("auth error: halting requires the admin credential");
        inst.halted = true;
        ctx.put(WorkflowContracts::kContract, instance_key(id), instance_to_json(inst).dump());
        ctx.emit("WorkflowHalted", {{"instance", id}, {"reason", p.value("reason", "")}});
        return;
    }
    if (op == "unhalt") {
        if (!submitter_is_admin(ctx))
            throw AuthError("auth error: resuming requires the admin credential");
        inst.halted = false;
        ctx.put(WorkflowContracts::kContract, instance_key(id), instance_to_json(inst).dump());
        ctx.emit("WorkflowResumed", {{"instance", id}});
        return;
    }
    if (op == "suspend") {
        if (!ctx.is_internal_call() && !submitter_is_admin(ctx))
            throw AuthError("auth error: suspension requires the admin credential");
        inst.suspended_until[p.at("did").get<std::string>()] = p.at("until").get<uint64_t>();
        ctx.put(WorkflowContracts::kContract, instance_key(id), instance_to_json(inst).dump());
        ctx.emit("ParticipantSuspended",
                 {{"instance", id}, {"did", p.at("did").get<std::string>()}, {"until", std::to_string(p.at("until").get<uint64_t>())}});
        return;
    }
    throw DispatchError("unknown ilc op: " + op);
}

}  // namespace

void WorkflowContracts::install(Ledger& ledger, const Cas& cas) {
    if (ledger.has_contract(kContract)) return;
    const Cas* cas_ptr = &cas;
    ledger.register_contract(kContract, [cas_ptr](ContractContext& ctx) { ilc_handler(ctx, *cas_ptr); });
}

WorkflowContracts::WorkflowContracts(DidRegistry& registry) : registry_(registry) {
    install(registry_.ledger(), registry_.cas());
}

std::string WorkflowContracts::deploy(const WorkflowMachine& machine, const std::vector<Did>& participants,
                                      const KeyPair& submitter, std::optional<Digest> attached_task) {
    validate_machine(machine);
    json payload{{"op", "deploy"}, {"machine", machine_to_json(machine)}};
    payload["participants"] = json::array();
    for (const auto& p : participants) payload["participants"].push_back(p.str());
    if (attached_task) payload["attached_task"] = attached_task->hex();
    Receipt r = registry_.ledger().submit(kContract, to_bytes(payload.dump()), submitter, "deployer");
    if (!r.ok) rethrow_receipt(r);
    for (const auto& ev : r.events) {
        if (ev.kind == "WorkflowDeployed") return ev.attributes.at("instance");
    }
    throw std::logic_error("deployment produced no WorkflowDeployed event");
}

std::string WorkflowContracts::submit_event(const std::string& instance_id, const std::string& event,
                                            const json& payload,
                                            const std::vector<EventEndorsement>& signatures,
                                            const KeyPair& submitter) {
    json sigs = json::array();
    for (const auto& s : signatures) {
        sigs.push_back({{"did", s.signer.str()},
                        {"sig", to_hex(BytesView(s.signature.bytes.data(), s.signature.bytes.size()))}});
    }
    json body{{"op", "fire"}, {"instance", instance_id}, {"event", event}, {"payload", payload}, {"signatures", sigs}};
    Receipt r = registry_.ledger().submit(kContract, to_bytes(body.dump()), submitter, "aggregator");
    if (!r.ok) rethrow_receipt(r);
    for (const auto& ev : r.events) {
        if (ev.kind == "TransitionEvent") return ev.attributes.at("to");
    }
    throw std::logic_error("fire produced no TransitionEvent");
}

void WorkflowContracts::halt(const std::string& instance_id, const KeyPair& authority) {
    json body{{"op", "halt"}, {"instance", instance_id}};
    Receipt r = registry_.ledger().submit(kContract, to_bytes(body.dump()), authority, "doe");
    if (!r.ok) rethrow_receipt(r);
}

void WorkflowContracts::unhalt(const std::string& instance_id, const KeyPair& admin) {
    json body{{"op", "unhalt"}, {"instance", instance_id}};
    Receipt r = registry_.ledger().submit(kContract, to_bytes(body.dump()), admin, "admin");
    if (!r.ok) rethrow_receipt(r);
}

void WorkflowContracts::suspend(const std::string& instance_id, const Did& did, uint64_t until_height,
                                const KeyPair& authority) {
    json body{{"op", "suspend"}, {"instance", instance_id}, {"did", did.str()}, {"until", until_height}};
    Receipt r = registry_.ledger().submit(kContract, to_bytes(body.dump()), authority, "doe");
    if (!r.ok) rethrow_receipt(r);
}

WorkflowInstance WorkflowContracts::instance(const std::string& instance_id) const {
    auto raw = registry_.ledger().state_get(kContract, "instance/" + instance_id);
    if (!raw) throw NotFoundError("workflow instance not found: " + instance_id);
    return instance_from_json(json::parse(*raw));
}

std::vector<TransitionRecord> WorkflowContracts::transition_log(const std::string& instance_id) const {
    std::vector<TransitionRecord> out;
    auto raw = registry_.ledger().state_get(kContract, "log/" + instance_id);
    if (!raw) return out;
    for (const auto& e : json::parse(*raw)) {
        out.push_back({e.at("from").get<std::string>(), e.at("event").get<std::string>(),
                       e.at("to").get<std::string>(), LedgerTime::at(e.at("time").get<uint64_t>())});
    }
    return out;
}

std::vector<std::string> WorkflowContracts::instances_for_task(const Digest& task_hash) const {
    std::vector<std::string> out;
    for (const auto& [key, value] : registry_.ledger().state_entries(kContract)) {
        if (key.rfind("instance/", 0) != 0) continue;
        WorkflowInstance inst = instance_from_json(json::parse(value));
        if (inst.attached_task && *inst.attached_task == task_hash) {
            out.push_back(inst.id);
            continue;
        }
        for (const auto& [state, guard] : inst.machine.guards) {
            if (guard.required_task && *guard.required_task == task_hash) {
                out.push_back(inst.id);
                break;
            }
        }
    }
    return out;
}

bool WorkflowContracts::audit_transitions(const std::string& instance_id) const {
    WorkflowInstance inst = instance(instance_id);
    auto raw = registry_.ledger().state_get(kContract, "log/" + instance_id);
    if (!raw) return true;

    // replay the recorded tuples through the machine and re-verify signatures
    std::string cursor = inst.machine.initial;
    for (const auto& e : json::parse(*raw)) {
        std::string from = e.at("from").get<std::string>();
        std::string event = e.at("event").get<std::string>();
        std::string to = e.at("to").get<std::string>();
        if (from != cursor) return false;
        const WorkflowTransition* t = nullptr;
        for (const auto& tr : inst.machine.transitions) {
            if (tr.from == from && tr.event == event) t = &tr;
        }
        if (!t || t->to != to) return false;

        Bytes msg = ilc_event_signing_bytes(instance_id, from, event);
        std::set<std::string> valid;
        for (const auto& s : e.value("signatures", json::array())) {
            Did signer = parse_did(s.at("did").get<std::string>());
            try {
                DidDocument doc = registry_.fetch_document(signer);
                const DidKey* key = doc.first_key_of(Scheme::Aggregatable);
                if (!key) continue;
                Signature sig{Scheme::Aggregatable, from_hex(s.at("sig").get<std::string>())};
                if (verify(Scheme::Aggregatable, BytesView(key->public_key.data(), key->public_key.size()),
                           BytesView(msg.data(), msg.size()), sig)) {
                    valid.insert(signer.str());
                }
            } catch (const std::exception&) {
                continue;
            }
        }
        auto git = inst.machine.guards.find(from);
        GuardSpec guard = (git != inst.machine.guards.end()) ? git->second : GuardSpec{};
        size_t required = guard.quorum_k == 0 ? inst.participants.size() : guard.quorum_k;
        if (valid.size() < required) return false;
        if (guard.time_window) {
            uint64_t at = e.at("time").get<uint64_t>();
            if (at < guard.time_window->first || at > guard.time_window->second) return false;
        }
        cursor = to;
    }
    return cursor == inst.current;
}

}  // namespace blocka2a
