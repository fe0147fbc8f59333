#include "blocka2a/adapter.hpp"

#include "blocka2a/errors.hpp"

namespace blocka2a {

using nlohmann::json;

AgentCard agent_card_from_json(const json& j) {
    AgentCard c;
    c.name = j.at("name").get<std::string>();
    c.url = j.value("url", "https://" + c.name + ".example.com/a2a");
    if (j.contains("skills")) {
        for (const auto& s : j.at("skills")) {
            if (s.is_string()) {
                c.skills.push_back(s.get<std::string>());
            } else {
                c.skills.push_back(s.at("id").get<std::string>());
            }
        }
    }
    c.provider = j.value("provider", "");
    return c;
}

json agent_card_to_json(const AgentCard& c) {
    return json{{"name", c.name}, {"url", c.url}, {"skills", c.skills}, {"provider", c.provider}};
}

MasAdapter::MasAdapter(DidRegistry& registry, ProvenanceLedger& provenance, uint64_t seed)
    : registry_(registry), provenance_(provenance), seed_(seed) {}

const AdaptedAgent& MasAdapter::adapt_identity(const AgentCard& card) {
    if (agents_.contains(card.name))
        throw DuplicateError("duplicate identity mapping for card " + card.name);

    AdaptedAgent agent;
    agent.card = card;
    Bytes seed_material;
    append_u64_be(seed_material, seed_);
    append_field(seed_material, card.name);
    Digest base = sha256(seed_material);
    agent.msg_keys = generate_keypair(Scheme::Standard, base.view());
    Bytes agg_material(base.bytes.begin(), base.bytes.end());
    agg_material.push_back(0x42);
    agent.agg_keys = generate_keypair(Scheme::Aggregatable, sha256(agg_material).view());

    Did did = generate_did(BytesView(agent.msg_keys.public_key.data(), agent.msg_keys.public_key.size()));
    agent.did = did;
    agent.document.id = did;
    agent.document.public_keys.push_back({did.str() + "#key-1", Scheme::Standard, agent.msg_keys.public_key, {}});
    agent.document.public_keys.push_back({did.str() + "#key-2", Scheme::Aggregatable,
                                          agent.agg_keys.public_key, prove_possession(agent.agg_keys)});
    agent.document.services.push_back({"AgentCommunicationEndpoint", card.url});
    // the card's skills populate the capabilities field
    agent.document.capabilities = json{{"skills", card.skills},
                                       {"permissions", json::array({"read", "write", "invoke"})}};
    if (!card.provider.empty()) agent.document.capabilities["provider"] = card.provider;

    registry_.register_did(agent.document, agent.msg_keys);
    auto [it, inserted] = agents_.emplace(card.name, std::move(agent));
    return it->second;
}

const AdaptedAgent& MasAdapter::agent(const std::string& card_name) const {
    auto it = agents_.find(card_name);
    if (it == agents_.end()) throw NotFoundError("no adapted agent named " + card_name);
    return it->second;
}

bool MasAdapter::has_agent(const std::string& card_name) const { return agents_.contains(card_name); }

std::vector<std::string> MasAdapter::agent_names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : agents_) out.push_back(name);
    return out;
}

TaskMetadata MasAdapter::adapt_task(const MasTask& task) const {
    TaskMetadata meta;
    meta.initiator = agent(task.client).did;
    meta.participants.push_back(agent(task.client).did);
    for (const auto& s : task.servers) meta.participants.push_back(agent(s).did);
    // context id rides inside the description metadata
    meta.description = task.description + " [task:" + task.id + " ctx:" + task.context_id + "]";
    meta.deadline = registry_.ledger().current_time().logical_timestamp + task.deadline_ticks;
    return meta;
}

MessageOutcome MasAdapter::send_message(const std::string& from, const std::string& to, BytesView content,
                                        const std::string& action, bool claims_anchored) {
    const AdaptedAgent& sender = agent(from);
    SignedMessage msg = registry_.sign_message(sender.did, sender.msg_keys, content);
    return deliver_raw(msg, to, action, claims_anchored);
}

MessageOutcome MasAdapter::deliver_raw(const SignedMessage& msg, const std::string& recipient_name,
                                       const std::string& action, bool claims_anchored) {
    const AdaptedAgent& recipient = agent(recipient_name);
    MessageOutcome out;
    out.message = msg;
    out.content_hash = sha256(BytesView(msg.payload.data(), msg.payload.size()));
    out.decision = registry_.verify_message(msg, action);
    // the interaction attempt is recorded regardless of the outcome so the
    // forensic layer can trace rejected traffic too
    provenance_.record_message(msg.sender, recipient.did, out.content_hash, recipient.msg_keys,
                               claims_anchored);
    log_.push_back(out);
    return out;
}

TaskRecord MasAdapter::record_task(const MasTask& task) {
    TaskMetadata meta = adapt_task(task);
    return provenance_.initiate_task(meta, agent(task.client).msg_keys);
}

TaskRecord MasAdapter::update_task_status(const Digest& task_hash, const std::string& milestone,
                                          const std::vector<std::string>& signer_names) {
    std::vector<std::pair<Did, Signature>> sigs;
    Bytes msg = milestone_signing_bytes(task_hash, milestone);
    for (const auto& name : signer_names) {
        const AdaptedAgent& a = agent(name);
        sigs.emplace_back(a.did, sign(a.agg_keys, BytesView(msg.data(), msg.size())));
    }
    const AdaptedAgent& submitter = agent(signer_names.front());
    return provenance_.transition_state(task_hash, milestone, sigs, submitter.msg_keys);
}

TrustEquivalenceReport check_trust_equivalence(DidRegistry& registry, ProvenanceLedger& provenance,
                                               const MasAdapter& adapter) {
    TrustEquivalenceReport report;
    (void)provenance;

    // Authenticity: every adapted message accepted during the run still
    // verifies under its mapped did on re-check.
    report.authenticity = true;
    for (const auto& entry : adapter.message_log()) {
        if (!entry.decision.accepted) continue;
        auto again = registry.verify_message(entry.message, "read");
        bool ownership_ok = again.accepted || (again.reason != RejectReason::Ownership &&
                                               again.reason != RejectReason::UnknownSender);
        if (!ownership_ok) {
            report.authenticity = false;
            report.violations.push_back("message from " + entry.message.sender.str() + " no longer verifies");
        }
    }

    // Integrity: every anchored task hash recomputes from its stored metadata.
    report.integrity = true;
    for (const auto& [key, value] : registry.ledger().state_entries(ProvenanceLedger::kContract)) {
        if (key.rfind("task/", 0) != 0) continue;
        json rec = json::parse(value);
        TaskMetadata meta;
        meta.initiator = parse_did(rec.at("initiator").get<std::string>());
        for (const auto& p : rec.at("participants")) meta.participants.push_back(parse_did(p.get<std::string>()));
        Bytes stored = registry.cas().get(ContentId{Digest::from_hex_str(rec.at("metadata_cid").get<std::string>())});
        json meta_json = json::parse(to_string(BytesView(stored.data(), stored.size())));
        meta.description = meta_json.at("description").get<std::string>();
        Digest expected = task_hash_of(meta, rec.at("created_at").get<uint64_t>());
        if (expected.hex() != rec.at("task_hash").get<std::string>()) {
            report.integrity = false;
            report.violations.push_back("task " + rec.at("task_hash").get<std::string>() + " fails recomputation");
        }
    }

    // Accountability: every event naming a did resolves on the registry.
    report.accountability = true;
    for (const auto& ev : registry.ledger().query_events({})) {
        for (const auto& attr : {"sender", "recipient", "did", "initiator", "subject"}) {
            auto it = ev.attributes.find(attr);
            if (it == ev.attributes.end()) continue;
            if (it->second.rfind("did:blocka2a:", 0) != 0) continue;
            if (!DidRegistry::read_record(registry.ledger(), parse_did(it->second))) {
                report.accountability = false;
                report.violations.push_back("event " + ev.kind + " references unresolvable " + it->second);
            }
        }
    }
    return report;
}

}  // namespace blocka2a
