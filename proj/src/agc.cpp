#include "blocka2a/contracts/agc.hpp"

#include <set>

#include "blocka2a/errors.hpp"

namespace blocka2a {

using nlohmann::json;

std::string_view agc_state_name(AgcState s) {
    switch (s) {
        case AgcState::Created: return "Created";
        case AgcState::Active: return "Active";
        case AgcState::Revoked: return "Revoked";
    }
    return "?";
}

AgcState agc_state_from_name(std::string_view s) {
    if (s == "Created") return AgcState::Created;
    if (s == "Active") return AgcState::Active;
    if (s == "Revoked") return AgcState::Revoked;
    throw FormatError("unknown agc state: " + std::string(s));
}

Bytes agc_update_signing_bytes(const Did& did, const Digest& new_doc_hash) {
    Bytes buf;
    append_field(buf, std::string_view("agc-update"));
    append_field(buf, did.str());
    append_field(buf, new_doc_hash.hex());
    return buf;
}

namespace {

json record_to_json(const AgcRecord& r) {
    json controllers = json::array();
    for (const auto& c : r.controllers) {
        controllers.push_back({{"did", c.did.str()},
                               {"public_key", to_hex(BytesView(c.public_key.data(), c.public_key.size()))}});
    }
    json j{{"did", r.did.str()},
           {"state", std::string(agc_state_name(r.state))},
           {"root_hash", r.root_hash.hex()},
           {"controllers", controllers},
           {"quorum_k", r.quorum_k},
           {"valid_from", r.valid_from.block_height},
           {"annotation", r.annotation},
           {"state_trace", r.state_trace}};
    if (r.valid_until) j["valid_until"] = r.valid_until->block_height;
    return j;
}

AgcRecord record_from_json(const json& j) {
    AgcRecord r;
    r.did = parse_did(j.at("did").get<std::string>());
    r.state = agc_state_from_name(j.at("state").get<std::string>());
    r.root_hash = Digest::from_hex_str(j.at("root_hash").get<std::string>());
    for (const auto& c : j.at("controllers")) {
        r.controllers.push_back(
            {parse_did(c.at("did").get<std::string>()), from_hex(c.at("public_key").get<std::string>())});
    }
    r.quorum_k = j.at("quorum_k").get<uint32_t>();
    r.valid_from = LedgerTime::at(j.at("valid_from").get<uint64_t>());
    if (j.contains("valid_until")) r.valid_until = LedgerTime::at(j.at("valid_until").get<uint64_t>());
    r.annotation = j.value("annotation", "");
    r.state_trace = j.value("state_trace", std::vector<std::string>{});
    return r;
}

std::string record_key(const std::string& did_str) { return "record/" + did_str; }

// Recompute and store the contract-wide commitment over (did -> root_hash).
void refresh_commitment(ContractContext& ctx) {
    std::vector<Bytes> leaves;
    for (const auto& [key, value] : ctx.entries(AgcGovernance::kContract)) {
        if (key.rfind("record/", 0) != 0) continue;
        json j = json::parse(value);
        leaves.push_back(AgcGovernance::commitment_leaf(
            j.at("did").get<std::string>(), Digest::from_hex_str(j.at("root_hash").get<std::string>())));
    }
    auto tree = merkle_commit(leaves);
    ctx.put(AgcGovernance::kContract, "_commitment", tree.commitment.root.hex());
}

void agc_handler(ContractContext& ctx) {
    json p = json::parse(to_string(BytesView(ctx.payload().data(), ctx.payload().size())));
    std::string op = p.at("op").get<std::string>();

    if (op == "init") {
        if (ctx.get(AgcGovernance::kContract, "_admin"))
            throw DuplicateError("agc admin already initialized");
        ctx.put(AgcGovernance::kContract, "_admin", p.at("admin_address").get<std::string>());
        return;
    }

    std::string did_str = p.at("did").get<std::string>();
    if (!is_valid_did_string(did_str)) throw FormatError("malformed did string: " + did_str);
    Did did = parse_did(did_str);
    auto existing = ctx.get(AgcGovernance::kContract, record_key(did.str()));

    if (op == "register") {
        if (existing) throw DuplicateError("did already registered in agc: " + did.str());
        AgcRecord rec;
        rec.did = did;
        rec.state = AgcState::Created;
        rec.state_trace.push_back("Created");
        rec.root_hash = Digest::from_hex_str(p.at("doc_hash").get<std::string>());
        for (const auto& c : p.at("controllers")) {
            rec.controllers.push_back(
                {parse_did(c.at("did").get<std::string>()), from_hex(c.at("public_key").get<std::string>())});
        }
        rec.quorum_k = p.at("quorum_k").get<uint32_t>();
        if (rec.quorum_k == 0 || rec.quorum_k > rec.controllers.size())
            throw ValidationError("invalid quorum: k must be in [1, controller count]");
        rec.valid_from = ctx.now();
        // registration guard passed, the record becomes Active
        rec.state = AgcState::Active;
        rec.state_trace.push_back("Active");
        ctx.put(AgcGovernance::kContract, record_key(did.str()), record_to_json(rec).dump());
        refresh_commitment(ctx);
        ctx.emit("DIDCreated", {{"did", did.str()}, {"root_hash", rec.root_hash.hex()}});
        return;
    }

    if (op == "record_binding") {
        // internal bookkeeping from the access-control contract
        if (!ctx.is_internal_call()) throw AuthError("bindings are recorded by contracts only");
        std::string key = "bindings/" + did.str();
        json list = json::array();
        if (auto raw = ctx.get(AgcGovernance::kContract, key)) list = json::parse(*raw);
        for (const auto& b : list) {
            if (b == p.at("binding")) return;  // already recorded
        }
        list.push_back(p.at("binding"));
        ctx.put(AgcGovernance::kContract, key, list.dump());
        return;
    }

    if (!existing) throw NotFoundError("did not registered in agc: " + did.str());
    AgcRecord rec = record_from_json(json::parse(*existing));

    if (op == "update") {
        if (rec.state == AgcState::Revoked) throw FinalityError("finality: did is revoked");
        Digest new_hash = Digest::from_hex_str(p.at("doc_hash").get<std::string>());
        if (new_hash == rec.root_hash) throw ValidationError("no-op: document hash is unchanged");

        Bytes msg = agc_update_signing_bytes(did, new_hash);
        std::set<std::string> approved;
        for (const auto& a : p.at("approvals")) {
            Did controller = parse_did(a.at("did").get<std::string>());
            Signature sig{Scheme::Standard, from_hex(a.at("sig").get<std::string>())};
            for (const auto& c : rec.controllers) {
                if (c.did == controller &&
                    verify(Scheme::Standard, BytesView(c.public_key.data(), c.public_key.size()),
                           BytesView(msg.data(), msg.size()), sig)) {
                    approved.insert(controller.str());
                }
            }
        }
        if (approved.size() < rec.quorum_k)
            throw QuorumError("quorum shortfall: " + std::to_string(approved.size()) + " of " +
                              std::to_string(rec.quorum_k) + " required approvals");

        rec.root_hash = new_hash;
        ctx.put(AgcGovernance::kContract, record_key(did.str()), record_to_json(rec).dump());
        refresh_commitment(ctx);
        // event-driven sync into the identity layer
        json sync{{"op", "sync_update"}, {"did", did.str()}, {"doc_hash", new_hash.hex()}};
        ctx.invoke(DidRegistry::kContract, to_bytes(sync.dump()));
        ctx.emit("CapabilityUpdated", {{"did", did.str()}, {"root_hash", new_hash.hex()}});
        return;
    }

    if (op == "revoke") {
        auto admin = ctx.get(AgcGovernance::kContract, "_admin");
        if (!admin || ctx.submitter_address() != *admin)
            throw AuthError("auth error: revocation requires the admin credential");
        if (rec.state == AgcState::Revoked) {
            ctx.emit("DIDRevocationNoop", {{"did", did.str()}});
            return;  // idempotent
        }
        rec.state = AgcState::Revoked;
        rec.state_trace.push_back("Revoked");
        rec.valid_until = ctx.now();
        ctx.put(AgcGovernance::kContract, record_key(did.str()), record_to_json(rec).dump());
        refresh_commitment(ctx);
        if (ctx.get(DidRegistry::kNamespace, did.str())) {
            json sync{{"op", "set_revoked"}, {"did", did.str()}};
            ctx.invoke(DidRegistry::kContract, to_bytes(sync.dump()));
        }
        ctx.emit("DIDRevoked", {{"did", did.str()}});
        return;
    }

    if (op == "annotate") {
        if (!ctx.is_internal_call()) {
            auto admin = ctx.get(AgcGovernance::kContract, "_admin");
            if (!admin || ctx.submitter_address() != *admin)
                throw AuthError("auth error: annotation requires the admin credential");
        }
        rec.annotation = p.at("note").get<std::string>();
        ctx.put(AgcGovernance::kContract, record_key(did.str()), record_to_json(rec).dump());
        ctx.emit("AgentAnnotated", {{"did", did.str()}, {"note", rec.annotation}});
        return;
    }

    throw DispatchError("unknown agc op: " + op);
}

}  // namespace

Bytes AgcGovernance::commitment_leaf(const std::string& did_str, const Digest& root_hash) {
    Bytes leaf;
    append_field(leaf, did_str);
    append_field(leaf, root_hash.hex());
    return leaf;
}

void AgcGovernance::install(Ledger& ledger) {
    if (!ledger.has_contract(kContract)) ledger.register_contract(kContract, agc_handler);
}

AgcGovernance::AgcGovernance(DidRegistry& registry, KeyPair admin_keys)
    : registry_(registry), admin_keys_(std::move(admin_keys)) {
    install(registry_.ledger());
    if (!registry_.ledger().state_get(kContract, "_admin")) {
        json init{{"op", "init"}, {"admin_address", admin_address()}};
        Receipt r = registry_.ledger().submit(kContract, to_bytes(init.dump()), admin_keys_, "agc-admin");
        if (!r.ok) rethrow_receipt(r);
    }
}

std::string AgcGovernance::admin_address() const {
    return address_of_key(BytesView(admin_keys_.public_key.data(), admin_keys_.public_key.size()));
}

AgcRecord AgcGovernance::register_agent(const Did& did, const Digest& doc_hash,
                                        const std::vector<AgcController>& controllers, uint32_t quorum_k,
                                        const KeyPair& submitter) {
    json cs = json::array();
    for (const auto& c : controllers) {
        cs.push_back({{"did", c.did.str()},
                      {"public_key", to_hex(BytesView(c.public_key.data(), c.public_key.size()))}});
    }
    json payload{{"op", "register"},
                 {"did", did.str()},
                 {"doc_hash", doc_hash.hex()},
                 {"controllers", cs},
                 {"quorum_k", quorum_k}};
    Receipt r = registry_.ledger().submit(kContract, to_bytes(payload.dump()), submitter, did.str());
    if (!r.ok) rethrow_receipt(r);
    return record(did);
}

AgcRecord AgcGovernance::update(const Did& did, const DidDocument& new_doc,
                                const std::vector<ControllerApproval>& approvals, const KeyPair& submitter) {
    Bytes canon = canonical_document_bytes(new_doc);
    ContentId cid = registry_.cas().put(canon);

    json as = json::array();
    for (const auto& a : approvals) {
        as.push_back({{"did", a.controller.str()},
                      {"sig", to_hex(BytesView(a.signature.bytes.data(), a.signature.bytes.size()))}});
    }
    json payload{{"op", "update"}, {"did", did.str()}, {"doc_hash", cid.digest.hex()}, {"approvals", as}};
    Receipt r = registry_.ledger().submit(kContract, to_bytes(payload.dump()), submitter, did.str());
    if (!r.ok) rethrow_receipt(r);
    return record(did);
}

AgcRecord AgcGovernance::revoke(const Did& did, const KeyPair& revoker) {
    json payload{{"op", "revoke"}, {"did", did.str()}};
    Receipt r = registry_.ledger().submit(kContract, to_bytes(payload.dump()), revoker, "revoker");
    if (!r.ok) rethrow_receipt(r);
    return record(did);
}

AgcRecord AgcGovernance::record(const Did& did) const {
    auto raw = registry_.ledger().state_get(kContract, "record/" + did.str());
    if (!raw) throw NotFoundError("did not registered in agc: " + did.str());
    return record_from_json(json::parse(*raw));
}

AgcResolution AgcGovernance::resolve(const Did& did) const {
    AgcRecord rec = record(did);

    // rebuild the commitment tree over current records to extract the proof
    std::vector<Bytes> leaves;
    size_t index = 0, cursor = 0;
    for (const auto& [key, value] : registry_.ledger().state_entries(kContract)) {
        if (key.rfind("record/", 0) != 0) continue;
        json j = json::parse(value);
        std::string entry_did = j.at("did").get<std::string>();
        if (entry_did == did.str()) index = cursor;
        leaves.push_back(commitment_leaf(entry_did, Digest::from_hex_str(j.at("root_hash").get<std::string>())));
        cursor++;
    }
    auto tree = merkle_commit(leaves);

    auto stored = registry_.ledger().state_get(kContract, "_commitment");
    if (!stored || Digest::from_hex_str(*stored) != tree.commitment.root)
        throw IntegrityError("agc commitment root does not match stored state");

    AgcResolution res;
    res.root_hash = rec.root_hash;
    res.state = rec.state;
    res.valid_from = rec.valid_from;
    res.valid_until = rec.valid_until;
    res.commitment_root = tree.commitment.root;
    res.proof = tree.proofs[index];
    return res;
}

std::vector<std::pair<std::string, std::string>> AgcGovernance::capability_bindings(const Did& did) const {
    std::vector<std::pair<std::string, std::string>> out;
    auto raw = registry_.ledger().state_get(kContract, "bindings/" + did.str());
    if (!raw) return out;
    for (const auto& b : json::parse(*raw)) {
        out.emplace_back(b.at("resource").get<std::string>(), b.at("action").get<std::string>());
    }
    return out;
}

}  // namespace blocka2a
