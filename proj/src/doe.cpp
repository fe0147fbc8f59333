#include "blocka2a/doe.hpp"

#include <cmath>

#include "blocka2a/errors.hpp"

namespace blocka2a {

using nlohmann::json;

std::string_view alert_kind_name(AlertKind k) {
    switch (k) {
        case AlertKind::ByzantineFlag: return "ByzantineFlag";
        case AlertKind::Tampering: return "Tampering";
        case AlertKind::Revocation: return "Revocation";
        case AlertKind::Anomaly: return "Anomaly";
    }
    return "?";
}

json evidence_to_json(const EvidenceBundle& b) {
    json refs = json::array();
    for (const auto& r : b.on_chain_refs) refs.push_back(r);
    json cids = json::array();
    for (const auto& c : b.off_chain_payloads) cids.push_back(c.hex());
    return json{{"subject", b.subject.str()},
                {"on_chain_refs", refs},
                {"off_chain_payloads", cids},
                {"assembled_at", b.assembled_at.logical_timestamp}};
}

namespace {

struct RepState {
    double alpha, beta;
    uint64_t last_update;
};

RepState rep_from_json(const json& j) {
    return RepState{j.at("alpha").get<double>(), j.at("beta").get<double>(), j.at("last_update").get<uint64_t>()};
}

json rep_to_json(const RepState& r) {
    return json{{"alpha", r.alpha}, {"beta", r.beta}, {"last_update", r.last_update}};
}

// Reputation metadata is on-chain state writable only by the engine's
// service identity.
void reputation_handler(ContractContext& ctx, double lambda) {
    json p = json::parse(to_string(BytesView(ctx.payload().data(), ctx.payload().size())));
    std::string op = p.at("op").get<std::string>();

    if (op == "init") {
        if (ctx.get(DefenseEngine::kReputationContract, "_writer"))
            throw DuplicateError("reputation writer already configured");
        ctx.put(DefenseEngine::kReputationContract, "_writer", p.at("writer").get<std::string>());
        return;
    }

    auto writer = ctx.get(DefenseEngine::kReputationContract, "_writer");
    if (!writer || ctx.submitter_address() != *writer)
        throw AuthError("auth error: only the defense engine writes reputation metadata");

    std::string did = p.at("did").get<std::string>();
    if (!ctx.get(DidRegistry::kNamespace, did)) throw NotFoundError("did not registered: " + did);
    std::string key = "rep/" + did;

    if (op == "ensure") {
        if (!ctx.get(DefenseEngine::kReputationContract, key)) {
            ctx.put(DefenseEngine::kReputationContract, key,
                    rep_to_json({1.0, 1.0, ctx.now().logical_timestamp}).dump());
        }
        return;
    }
    if (op == "update") {
        RepState s{1.0, 1.0, ctx.now().logical_timestamp};
        if (auto raw = ctx.get(DefenseEngine::kReputationContract, key)) s = rep_from_json(json::parse(*raw));
        uint64_t now = ctx.now().logical_timestamp;
        double decay = std::pow(lambda, static_cast<double>(now - s.last_update));
        s.alpha *= decay;
        s.beta *= decay;
        if (p.at("outcome").get<std::string>() == "success") {
            s.alpha += 1.0;
        } else {
            s.beta += 1.0;
        }
        s.last_update = now;
        ctx.put(DefenseEngine::kReputationContract, key, rep_to_json(s).dump());
        ctx.emit("ReputationUpdated", {{"did", did},
                                       {"score", std::to_string(s.alpha / (s.alpha + s.beta))},
                                       {"outcome", p.at("outcome").get<std::string>()}});
        return;
    }
    throw DispatchError("unknown reputation op: " + op);
}

void doe_handler(ContractContext& ctx) {
    json p = json::parse(to_string(BytesView(ctx.payload().data(), ctx.payload().size())));
    std::string op = p.at("op").get<std::string>();

    if (op == "init") {
        if (ctx.get(DefenseEngine::kContract, "_admin")) throw DuplicateError("doe admin already configured");
        ctx.put(DefenseEngine::kContract, "_admin", p.at("admin").get<std::string>());
        return;
    }

    auto admin = ctx.get(DefenseEngine::kContract, "_admin");
    if (!admin || ctx.submitter_address() != *admin)
        throw AuthError("auth error: defense operations require the engine identity");

    if (op == "alert") {
        uint64_t counter = 0;
        if (auto raw = ctx.get(DefenseEngine::kContract, "_alert_counter")) counter = std::stoull(*raw);
        counter++;
        ctx.put(DefenseEngine::kContract, "_alert_counter", std::to_string(counter));
        std::string id = "alert-" + std::to_string(counter);
        json rec{{"id", id},
                 {"kind", p.at("kind").get<std::string>()},
                 {"subject", p.at("subject").get<std::string>()},
                 {"reason", p.at("reason").get<std::string>()},
                 {"confidence", p.at("confidence").get<double>()},
                 {"time", ctx.now().logical_timestamp}};
        if (p.contains("evidence_cid")) rec["evidence_cid"] = p.at("evidence_cid").get<std::string>();
        ctx.put(DefenseEngine::kContract, "alert/" + id, rec.dump());
        std::map<std::string, std::string> attrs{{"id", id},
                                                 {"kind", p.at("kind").get<std::string>()},
                                                 {"subject", p.at("subject").get<std::string>()},
                                                 {"reason", p.at("reason").get<std::string>()},
                                                 {"confidence", std::to_string(p.at("confidence").get<double>())},
                                                 {"reason_hash", sha256_str(p.at("reason").get<std::string>()).hex()}};
        if (p.contains("evidence_cid")) attrs["evidence_cid"] = p.at("evidence_cid").get<std::string>();
        ctx.emit("DefenseAlert", attrs);
        return;
    }

    if (op == "halt_task") {
        std::string task_hex = p.at("task_hash").get<std::string>();
        // switch every workflow bound to the task onto a halting guard
        uint32_t halted = 0;
        for (const auto& [key, value] : ctx.entries("ilc")) {
            if (key.rfind("instance/", 0) != 0) continue;
            json inst = json::parse(value);
            bool attached = inst.contains("attached_task") &&
                            inst.at("attached_task").get<std::string>() == task_hex;
            if (!attached) {
                const json& guards = inst.at("machine").value("guards", json::object());
                for (const auto& [state, g] : guards.items()) {
                    if (g.value("required_task", "") == task_hex) attached = true;
                }
            }
            if (!attached) continue;
            json halt{{"op", "halt"}, {"instance", inst.at("id").get<std::string>()}, {"reason", "tampering"}};
            ctx.invoke(WorkflowContracts::kContract, to_bytes(halt.dump()));
            halted++;
        }
        ctx.emit("TaskHalted", {{"task_hash", task_hex}, {"workflows", std::to_string(halted)}});
        return;
    }

    if (op == "unhalt_task") {
        std::string task_hex = p.at("task_hash").get<std::string>();
        for (const auto& [key, value] : ctx.entries("ilc")) {
            if (key.rfind("instance/", 0) != 0) continue;
            json inst = json::parse(value);
            if (!inst.value("halted", false)) continue;
            bool attached = inst.contains("attached_task") &&
                            inst.at("attached_task").get<std::string>() == task_hex;
            if (!attached) continue;
            json unhalt{{"op", "unhalt"}, {"instance", inst.at("id").get<std::string>()}};
            ctx.invoke(WorkflowContracts::kContract, to_bytes(unhalt.dump()));
        }
        ctx.emit("TaskResumed", {{"task_hash", task_hex}});
        return;
    }

    if (op == "revoke_bindings") {
        std::string did = p.at("did").get<std::string>();
        json digests = json::array();
        for (const auto& b : p.at("bindings")) {
            json deny{{"op", "deny"},
                      {"did", did},
                      {"resource", b.at("resource").get<std::string>()},
                      {"action", b.at("action").get<std::string>()}};
            ctx.invoke(AccessControl::kContract, to_bytes(deny.dump()));
            Bytes digest_input;
            append_field(digest_input, did);
            append_field(digest_input, b.at("resource").get<std::string>());
            append_field(digest_input, b.at("action").get<std::string>());
            Bytes ts;
            append_u64_be(ts, ctx.now().logical_timestamp);
            append_field(digest_input, BytesView(ts.data(), ts.size()));
            Digest d = sha256(digest_input);
            digests.push_back(d.hex());
            ctx.emit("RevocationLogged", {{"did", did},
                                          {"resource", b.at("resource").get<std::string>()},
                                          {"action", b.at("action").get<std::string>()},
                                          {"digest", d.hex()}});
        }
        if (p.value("deny_all", false)) {
            json deny{{"op", "deny"}, {"did", did}};
            ctx.invoke(AccessControl::kContract, to_bytes(deny.dump()));
        }
        ctx.put(DefenseEngine::kContract, "revoked/" + did, digests.dump());
        return;
    }

    throw DispatchError("unknown doe op: " + op);
}


}  // namespace

void DefenseEngine::install_contracts(Ledger& ledger, double decay_lambda) {
    if (!ledger.has_contract(kReputationContract)) {
        ledger.register_contract(kReputationContract, [decay_lambda](ContractContext& ctx) {
            reputation_handler(ctx, decay_lambda);
        });
    }
    if (!ledger.has_contract(kContract)) ledger.register_contract(kContract, doe_handler);
}

DefenseEngine::DefenseEngine(DidRegistry& registry, AgcGovernance& agc, AccessControl& acc,
                             WorkflowContracts& ilc, ProvenanceLedger& provenance, KeyPair service_keys,
                             double decay_lambda)
    : registry_(registry), agc_(agc), acc_(acc), ilc_(ilc), provenance_(provenance),
      service_keys_(std::move(service_keys)), lambda_(decay_lambda) {
    Ledger& ledger = registry_.ledger();
    install_contracts(ledger, lambda_);

    std::string addr = address_of_key(BytesView(service_keys_.public_key.data(), service_keys_.public_key.size()));
    if (!ledger.state_get(kReputationContract, "_writer")) {
        json init{{"op", "init"}, {"writer", addr}};
        Receipt r = ledger.submit(kReputationContract, to_bytes(init.dump()), service_keys_, "doe");
        if (!r.ok) rethrow_receipt(r);
    }
    if (!ledger.state_get(kContract, "_admin")) {
        json init{{"op", "init"}, {"admin", addr}};
        Receipt r = ledger.submit(kContract, to_bytes(init.dump()), service_keys_, "doe");
        if (!r.ok) rethrow_receipt(r);
    }
}

// ---------------------------------------------------------------------------
// Reputation
// ---------------------------------------------------------------------------

ReputationScore DefenseEngine::ensure_reputation(const Did& did) {
    json payload{{"op", "ensure"}, {"did", did.str()}};
    Receipt r = registry_.ledger().submit(kReputationContract, to_bytes(payload.dump()), service_keys_, "doe");
    if (!r.ok) rethrow_receipt(r);
    return reputation(did);
}

ReputationScore DefenseEngine::update_reputation(const Did& did, Outcome outcome) {
    json payload{{"op", "update"},
                 {"did", did.str()},
                 {"outcome", outcome == Outcome::Success ? "success" : "failure"}};
    Receipt r = registry_.ledger().submit(kReputationContract, to_bytes(payload.dump()), service_keys_, "doe");
    if (!r.ok) rethrow_receipt(r);
    return reputation(did);
}

ReputationScore DefenseEngine::reputation(const Did& did) const {
    auto raw = registry_.ledger().state_get(kReputationContract, "rep/" + did.str());
    if (!raw) throw NotFoundError("no reputation record for " + did.str());
    RepState s = rep_from_json(json::parse(*raw));
    return ReputationScore{did, s.alpha, s.beta, LedgerTime::at(s.last_update)};
}

std::vector<ReputationScore> DefenseEngine::all_reputations() const {
    std::vector<ReputationScore> out;
    for (const auto& [key, value] : registry_.ledger().state_entries(kReputationContract)) {
        if (key.rfind("rep/", 0) != 0) continue;
        RepState s = rep_from_json(json::parse(value));
        out.push_back(ReputationScore{parse_did(key.substr(4)), s.alpha, s.beta, LedgerTime::at(s.last_update)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Baselines and anomaly detection
// ---------------------------------------------------------------------------

namespace {

// events attributable to a did: message sends plus workflow transitions;
// submitters that are not did strings (aggregators, services) are skipped
std::map<std::string, std::vector<const LedgerEvent*>> events_by_did(const std::vector<LedgerEvent>& events) {
    std::map<std::string, std::vector<const LedgerEvent*>> out;
    for (const auto& ev : events) {
        auto it = ev.attributes.find("sender");
        if (it != ev.attributes.end() && is_valid_did_string(it->second)) out[it->second].push_back(&ev);
    }
    return out;
}

}  // namespace

std::vector<BehaviorBaseline> DefenseEngine::build_baselines(uint64_t from_height, uint64_t to_height,
                                                             uint64_t bucket_ticks) const {
    EventFilter f;
    f.from_height = from_height;
    f.to_height = to_height;
    auto events = registry_.ledger().query_events(f);
    auto by_did = events_by_did(events);

    std::vector<BehaviorBaseline> out;
    size_t buckets = (to_height >= from_height) ? ((to_height - from_height) / bucket_ticks + 1) : 1;
    for (const auto& [did, evs] : by_did) {
        BehaviorBaseline b;
        b.did = parse_did(did);
        std::vector<double> counts(buckets, 0.0);
        for (const auto* ev : evs) {
            size_t bucket = (ev->time.block_height - from_height) / bucket_ticks;
            counts[std::min(bucket, buckets - 1)] += 1.0;
        }
        double mean = 0;
        for (double c : counts) mean += c;
        mean /= static_cast<double>(counts.size());
        double var = 0;
        for (double c : counts) var += (c - mean) * (c - mean);
        var /= static_cast<double>(counts.size());
        b.msg_rate_mean = mean;
        b.msg_rate_stddev = std::sqrt(var);
        out.push_back(std::move(b));
    }

    // transition patterns per did come from workflow events the did endorsed
    for (const auto& ev : events) {
        if (ev.kind != "TransitionEvent" && ev.kind != "TaskStateTransition") continue;
        auto sender = ev.attributes.find("sender");
        std::string from_state = ev.kind == "TransitionEvent" ? ev.attributes.at("from") : "task";
        std::string trigger = ev.kind == "TransitionEvent" ? ev.attributes.at("event")
                                                           : ev.attributes.at("milestone");
        for (auto& b : out) {
            if (sender != ev.attributes.end() && sender->second == b.did.str()) {
                b.transition_patterns[{from_state, trigger}]++;
            }
        }
    }
    return out;
}

std::vector<AnomalyFinding> DefenseEngine::detect_anomaly(uint64_t from_height, uint64_t to_height,
                                                          const std::vector<BehaviorBaseline>& baselines,
                                                          double z, uint64_t bucket_ticks) const {
    EventFilter f;
    f.from_height = from_height;
    f.to_height = to_height;
    auto events = registry_.ledger().query_events(f);
    auto by_did = events_by_did(events);

    std::vector<AnomalyFinding> findings;
    for (const auto& [did, evs] : by_did) {
        const BehaviorBaseline* base = nullptr;
        for (const auto& b : baselines) {
            if (b.did.str() == did) base = &b;
        }
        if (!base) continue;  // no baseline, nothing to compare against

        size_t buckets = (to_height >= from_height) ? ((to_height - from_height) / bucket_ticks + 1) : 1;
        double peak = 0;
        std::vector<double> counts(buckets, 0.0);
        for (const auto* ev : evs) {
            size_t bucket = (ev->time.block_height - from_height) / bucket_ticks;
            counts[std::min(bucket, buckets - 1)] += 1.0;
        }
        for (double c : counts) peak = std::max(peak, c);

        double threshold = base->msg_rate_mean + z * base->msg_rate_stddev;
        if (peak > threshold && peak > 0) {
            AnomalyFinding a;
            a.did = parse_did(did);
            a.kind = AnomalyKind::RateBurst;
            a.confidence = std::clamp(1.0 - threshold / peak, 0.0, 1.0);
            a.detail = "rate " + std::to_string(peak) + " exceeds baseline " + std::to_string(threshold);
            findings.push_back(std::move(a));
        }

        // novel (state, event) patterns never seen in the baseline
        for (const auto* ev : evs) {
            if (ev->kind != "TransitionEvent" && ev->kind != "TaskStateTransition") continue;
            std::string from_state = ev->kind == "TransitionEvent" ? ev->attributes.at("from") : "task";
            std::string trigger = ev->kind == "TransitionEvent" ? ev->attributes.at("event")
                                                                : ev->attributes.at("milestone");
            if (!base->transition_patterns.contains({from_state, trigger})) {
                AnomalyFinding a;
                a.did = parse_did(did);
                a.kind = AnomalyKind::NovelPattern;
                a.confidence = 1.0;
                a.detail = "novel transition pattern (" + from_state + ", " + trigger + ")";
                findings.push_back(std::move(a));
                break;
            }
        }
    }
    return findings;
}

// ---------------------------------------------------------------------------
// Counter-attack algorithms
// ---------------------------------------------------------------------------

Alert DefenseEngine::submit_alert(AlertKind kind, const Did& subject, const std::string& reason,
                                  double confidence, std::optional<ContentId> evidence) {
    json payload{{"op", "alert"},
                 {"kind", std::string(alert_kind_name(kind))},
                 {"subject", subject.str()},
                 {"reason", reason},
                 {"confidence", confidence}};
    if (evidence) payload["evidence_cid"] = evidence->hex();
    Receipt r = registry_.ledger().submit(kContract, to_bytes(payload.dump()), service_keys_, "doe");
    if (!r.ok) rethrow_receipt(r);

    Alert alert;
    for (const auto& ev : r.events) {
        if (ev.kind != "DefenseAlert") continue;
        alert.id = ev.attributes.at("id");
        alert.kind = kind;
        alert.subject = subject;
        alert.reason = reason;
        alert.confidence = confidence;
        alert.time = ev.time;
        alert.evidence_cid = evidence;
    }
    return alert;
}

EvidenceBundle DefenseEngine::assemble_evidence(const Did& subject) const {
    EvidenceBundle bundle;
    bundle.subject = subject;
    bundle.assembled_at = registry_.ledger().current_time();
    auto events = registry_.ledger().query_events({});
    for (const auto& ev : events) {
        bool mentions = false;
        for (const auto& [k, v] : ev.attributes) {
            if (v == subject.str()) mentions = true;
        }
        if (!mentions) continue;
        bundle.on_chain_refs.push_back(std::to_string(ev.time.block_height) + ":" +
                                       std::to_string(ev.intra_block_index) + ":" + ev.kind);
    }
    // off-chain task data for tasks the subject participates in
    for (const auto& [key, value] : registry_.ledger().state_entries(ProvenanceLedger::kContract)) {
        if (key.rfind("task/", 0) != 0) continue;
        json rec = json::parse(value);
        bool involved = rec.at("initiator").get<std::string>() == subject.str();
        for (const auto& p : rec.at("participants")) {
            if (p.get<std::string>() == subject.str()) involved = true;
        }
        if (involved) {
            bundle.off_chain_payloads.push_back(
                ContentId{Digest::from_hex_str(rec.at("metadata_cid").get<std::string>())});
        }
    }
    return bundle;
}

std::vector<Alert> DefenseEngine::alert_anomalies(const std::vector<AnomalyFinding>& findings) {
    std::vector<Alert> alerts;
    for (const auto& f : findings) {
        alerts.push_back(submit_alert(AlertKind::Anomaly, f.did, f.detail, f.confidence, std::nullopt));
    }
    return alerts;
}

std::vector<Alert> DefenseEngine::flag_byzantine(double tau) {
    std::vector<Alert> alerts;
    for (const auto& rep : all_reputations()) {
        if (rep.score() >= tau) continue;

        EvidenceBundle bundle = assemble_evidence(rep.did);
        ContentId evidence = registry_.cas().put(to_bytes(evidence_to_json(bundle).dump()));

        json annotate{{"op", "annotate"}, {"did", rep.did.str()}, {"note", "suspicious"}};
        Receipt r = registry_.ledger().submit(AgcGovernance::kContract, to_bytes(annotate.dump()),
                                              agc_.admin_keys(), "doe");
        if (!r.ok && r.error.find("not registered in agc") == std::string::npos) rethrow_receipt(r);

        std::string reason = "reputation score " + std::to_string(rep.score()) + " below threshold " +
                             std::to_string(tau);
        alerts.push_back(submit_alert(AlertKind::ByzantineFlag, rep.did, reason, 1.0 - rep.score(), evidence));
    }
    return alerts;
}

TamperDecision DefenseEngine::halt_on_tamper(BytesView received, const Did& sender,
                                             const Digest& expected_hash, const Digest& task_hash) {
    provenance_.task(task_hash);  // throws NotFoundError for unknown tasks

    if (sha256(received) == expected_hash) return TamperDecision{false, std::nullopt};

    json evidence{{"sender", sender.str()},
                  {"expected_hash", expected_hash.hex()},
                  {"received_hash", sha256(received).hex()},
                  {"received", to_hex(received)},
                  {"task_hash", task_hash.hex()}};
    ContentId cid = registry_.cas().put(to_bytes(evidence.dump()));

    json halt{{"op", "halt_task"}, {"task_hash", task_hash.hex()}};
    Receipt r = registry_.ledger().submit(kContract, to_bytes(halt.dump()), service_keys_, "doe");
    if (!r.ok) rethrow_receipt(r);

    Alert alert = submit_alert(AlertKind::Tampering, sender, "payload hash mismatch for task " + task_hash.hex(),
                               1.0, cid);
    return TamperDecision{true, alert};
}

std::vector<Digest> DefenseEngine::revoke_permissions(const Did& did, uint64_t from_height,
                                                      uint64_t to_height, bool threat_signal) {
    if (!threat_signal) return {};

    // confirmation: an anomaly finding or an existing alert inside the slice
    uint64_t baseline_end = from_height > 0 ? from_height - 1 : 0;
    auto baselines = build_baselines(0, baseline_end);
    auto findings = detect_anomaly(from_height, to_height, baselines);
    bool confirmed = false;
    for (const auto& f : findings) {
        if (f.did == did) confirmed = true;
    }
    EventFilter f;
    f.kind = "DefenseAlert";
    f.from_height = from_height;
    f.to_height = to_height;
    for (const auto& ev : registry_.ledger().query_events(f)) {
        if (ev.attributes.at("subject") == did.str()) confirmed = true;
    }
    if (!confirmed) return {};

    auto bindings = agc_.capability_bindings(did);
    json blist = json::array();
    for (const auto& [resource, action] : bindings) {
        blist.push_back({{"resource", resource}, {"action", action}});
    }
    json payload{{"op", "revoke_bindings"}, {"did", did.str()}, {"bindings", blist}, {"deny_all", true}};
    Receipt r = registry_.ledger().submit(kContract, to_bytes(payload.dump()), service_keys_, "doe");
    if (!r.ok) rethrow_receipt(r);

    std::vector<Digest> digests;
    for (const auto& ev : r.events) {
        if (ev.kind == "RevocationLogged") digests.push_back(Digest::from_hex_str(ev.attributes.at("digest")));
    }
    submit_alert(AlertKind::Revocation, did, "permissions revoked after confirmed suspicious activity", 1.0,
                 std::nullopt);
    return digests;
}

void DefenseEngine::throttle(const std::string& instance_id, const Did& did, uint64_t until_height) {
    ilc_.suspend(instance_id, did, until_height, agc_.admin_keys());
}

void DefenseEngine::unhalt_task(const Digest& task_hash) {
    json payload{{"op", "unhalt_task"}, {"task_hash", task_hash.hex()}};
    Receipt r = registry_.ledger().submit(kContract, to_bytes(payload.dump()), service_keys_, "doe");
    if (!r.ok) rethrow_receipt(r);
}

// ---------------------------------------------------------------------------
// Forensics
// ---------------------------------------------------------------------------

ForensicReport DefenseEngine::forensic_query(const ForensicSpec& spec) const {
    ForensicReport report;
    EventFilter f;
    f.from_height = spec.from_height;
    f.to_height = spec.to_height;
    auto events = registry_.ledger().query_events(f);

    for (const auto& ev : events) {
        if (!spec.subjects.empty()) {
            bool match = false;
            for (const auto& [k, v] : ev.attributes) {
                if (spec.subjects.contains(v)) match = true;
            }
            if (!match) continue;
        }
        report.timeline.push_back(ev);
        report.contract_trace.emplace_back(ev.emitting_contract, ev.kind);

        if (spec.build_graph) {
            if (ev.kind == "MessageRecorded") {
                report.interaction_edges[{ev.attributes.at("sender"), ev.attributes.at("recipient")}]++;
            } else if (ev.kind == "TaskInitiated") {
                // task events connect the initiator to the participants
                auto task_raw = registry_.ledger().state_get(ProvenanceLedger::kContract,
                                                             "task/" + ev.attributes.at("task_hash"));
                if (task_raw) {
                    json rec = json::parse(*task_raw);
                    for (const auto& p : rec.at("participants")) {
                        report.interaction_edges[{rec.at("initiator").get<std::string>(),
                                                  p.get<std::string>()}]++;
                    }
                }
            }
        }

        // integrity-check payload references
        auto check_anchor = [&](const std::string& hex, bool must_be_anchored) {
            Digest h = Digest::from_hex_str(hex);
            auto anchor = provenance_.anchor_record(h);
            if (!anchor) {
                if (must_be_anchored) {
                    report.warnings.push_back("unanchored payload reference " + hex + " in event " + ev.kind);
                    report.tainted_events.push_back(ev);
                }
                return;
            }
            try {
                Bytes content = registry_.cas().get(anchor->content_id);
                if (sha256(content) != h) {
                    report.warnings.push_back("tainted evidence: stored payload for " + hex +
                                              " fails integrity");
                    report.tainted_events.push_back(ev);
                }
            } catch (const NotFoundError&) {
                report.warnings.push_back("missing payload bytes for " + hex);
                report.tainted_events.push_back(ev);
            }
        };
        if (auto it = ev.attributes.find("content_hash"); it != ev.attributes.end()) {
            auto claims = ev.attributes.find("claims_anchored");
            check_anchor(it->second, claims != ev.attributes.end() && claims->second == "true");
        }
        if (auto it = ev.attributes.find("payload_hash"); it != ev.attributes.end())
            check_anchor(it->second, false);
        if (auto it = ev.attributes.find("evidence_cid"); it != ev.attributes.end()) {
            if (!registry_.cas().contains(ContentId{Digest::from_hex_str(it->second)})) {
                report.warnings.push_back("missing evidence bundle " + it->second);
                report.tainted_events.push_back(ev);
            }
        }
    }
    return report;
}

std::vector<Alert> DefenseEngine::alerts() const {
    std::vector<Alert> out;
    for (const auto& [key, value] : registry_.ledger().state_entries(kContract)) {
        if (key.rfind("alert/", 0) != 0) continue;
        json j = json::parse(value);
        Alert a;
        a.id = j.at("id").get<std::string>();
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "ByzantineFlag") a.kind = AlertKind::ByzantineFlag;
        else if (kind == "Tampering") a.kind = AlertKind::Tampering;
        else if (kind == "Revocation") a.kind = AlertKind::Revocation;
        else a.kind = AlertKind::Anomaly;
        a.subject = parse_did(j.at("subject").get<std::string>());
        a.reason = j.at("reason").get<std::string>();
        a.confidence = j.at("confidence").get<double>();
        a.time = LedgerTime::at(j.at("time").get<uint64_t>());
        if (j.contains("evidence_cid"))
            a.evidence_cid = ContentId{Digest::from_hex_str(j.at("evidence_cid").get<std::string>())};
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace blocka2a
