#include "blocka2a/identity.hpp"

#include <algorithm>
#include <cctype>

#include "blocka2a/errors.hpp"

namespace blocka2a {

using nlohmann::json;

namespace {

constexpr std::string_view kMethodPrefix = "did:blocka2a:";

bool suffix_char_ok(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
}

std::string multibase_encode(BytesView b) { return "z" + base58_encode(b); }

Bytes multibase_decode(const std::string& s) {
    if (s.empty() || s[0] != 'z') throw FormatError("expected base58btc multibase value");
    return base58_decode(std::string_view(s).substr(1));
}

Scheme scheme_of_proof_type(const std::string& t) {
    if (t == "Ed25519Signature2020") return Scheme::Standard;
    if (t == "Bls12381Signature2020") return Scheme::Aggregatable;
    throw FormatError("unknown proof type: " + t);
}

}  // namespace

Did parse_did(const std::string& s) {
    if (s.rfind(kMethodPrefix, 0) != 0) throw FormatError("did must start with did:blocka2a:");
    std::string suffix = s.substr(kMethodPrefix.size());
    if (suffix.empty()) throw FormatError("did suffix is empty");
    for (char c : suffix) {
        if (!suffix_char_ok(c)) throw FormatError("did suffix contains non URL-safe character");
    }
    return Did{suffix};
}

bool is_valid_did_string(const std::string& s) {
    try {
        parse_did(s);
        return true;
    } catch (const FormatError&) {
        return false;
    }
}

Did generate_did(BytesView public_key) {
    Digest d = sha256(public_key);
    return Did{base58_encode(BytesView(d.bytes.data(), 20))};
}

const DidKey* DidDocument::find_key(const std::string& key_id) const {
    for (const auto& k : public_keys) {
        if (k.id == key_id) return &k;
    }
    return nullptr;
}

const DidKey* DidDocument::first_key_of(Scheme scheme) const {
    for (const auto& k : public_keys) {
        if (k.scheme == scheme) return &k;
    }
    return nullptr;
}

json document_to_json(const DidDocument& doc) {
    json j;
    j["id"] = doc.id.str();
    j["publicKey"] = json::array();
    for (const auto& k : doc.public_keys) {
        json entry{{"id", k.id},
                   {"type", std::string(scheme_name(k.scheme))},
                   {"publicKeyMultibase", multibase_encode(BytesView(k.public_key.data(), k.public_key.size()))}};
        if (!k.possession_proof.empty()) {
            entry["proofOfPossession"] =
                multibase_encode(BytesView(k.possession_proof.data(), k.possession_proof.size()));
        }
        j["publicKey"].push_back(std::move(entry));
    }
    j["service"] = json::array();
    for (const auto& s : doc.services) {
        j["service"].push_back({{"type", s.type}, {"serviceEndpoint", s.endpoint}});
    }
    j["capabilities"] = doc.capabilities;
    j["policy-constraints"] = doc.policy_constraints;
    if (doc.proof) {
        j["proof"] = {{"type", doc.proof->type},
                      {"created", doc.proof->created},
                      {"verificationMethod", doc.proof->verification_method},
                      {"proofValue", multibase_encode(BytesView(doc.proof->value.data(), doc.proof->value.size()))}};
    }
    return j;
}

DidDocument document_from_json(const json& j) {
    DidDocument doc;
    doc.id = parse_did(j.at("id").get<std::string>());
    if (j.contains("publicKey")) {
        for (const auto& k : j.at("publicKey")) {
            DidKey key;
            key.id = k.at("id").get<std::string>();
            key.scheme = scheme_from_name(k.at("type").get<std::string>());
            key.public_key = multibase_decode(k.at("publicKeyMultibase").get<std::string>());
            if (k.contains("proofOfPossession"))
                key.possession_proof = multibase_decode(k.at("proofOfPossession").get<std::string>());
            doc.public_keys.push_back(std::move(key));
        }
    }
    if (j.contains("service")) {
        for (const auto& s : j.at("service")) {
            doc.services.push_back({s.at("type").get<std::string>(), s.at("serviceEndpoint").get<std::string>()});
        }
    }
    doc.capabilities = j.value("capabilities", json::object());
    doc.policy_constraints = j.value("policy-constraints", json::object());
    if (j.contains("proof") && !j.at("proof").is_null()) {
        const auto& p = j.at("proof");
        DocumentProof proof;
        proof.type = p.at("type").get<std::string>();
        proof.created = p.value("created", "");
        proof.verification_method = p.at("verificationMethod").get<std::string>();
        proof.value = multibase_decode(p.at("proofValue").get<std::string>());
        doc.proof = std::move(proof);
    }
    return doc;
}

Bytes canonical_document_bytes(const DidDocument& doc) {
    // nlohmann::json orders object keys lexicographically, so dump() with no
    // indentation is the canonical form.
    return to_bytes(document_to_json(doc).dump());
}

Digest document_hash(const DidDocument& doc) { return sha256(canonical_document_bytes(doc)); }

Bytes document_proof_bytes(const DidDocument& doc) {
    DidDocument unsigned_doc = doc;
    unsigned_doc.proof.reset();
    return canonical_document_bytes(unsigned_doc);
}

std::string_view reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::UnknownSender: return "UnknownSender";
        case RejectReason::Revoked: return "Revoked";
        case RejectReason::Integrity: return "Integrity";
        case RejectReason::Ownership: return "Ownership";
        case RejectReason::Permissions: return "Permissions";
    }
    return "Unknown";
}

uint64_t parse_data_size(const std::string& s) {
    size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) i++;
    if (i == 0) throw FormatError("data size must start with digits: " + s);
    uint64_t value = std::stoull(s.substr(0, i));
    std::string unit = s.substr(i);
    while (!unit.empty() && unit.front() == ' ') unit.erase(unit.begin());
    if (unit.empty() || unit == "B") return value;
    if (unit == "KB") return value * 1000ull;
    if (unit == "MB") return value * 1000ull * 1000ull;
    if (unit == "GB") return value * 1000ull * 1000ull * 1000ull;
    if (unit == "KiB") return value << 10;
    if (unit == "MiB") return value << 20;
    if (unit == "GiB") return value << 30;
    throw FormatError("unknown data size unit: " + unit);
}

namespace {

int parse_hhmm(const std::string& s) {
    if (s.size() != 5 || s[2] != ':') throw FormatError("time must be HH:MM, got " + s);
    int h = std::stoi(s.substr(0, 2));
    int m = std::stoi(s.substr(3, 2));
    if (h < 0 || h > 23 || m < 0 || m > 59) throw FormatError("time out of range: " + s);
    return h * 60 + m;
}

}  // namespace

bool time_within_daily_window(const std::string& window, const std::string& hhmm) {
    std::string w = window;
    if (auto pos = w.find(" UTC"); pos != std::string::npos) w = w.substr(0, pos);
    auto dash = w.find('-');
    if (dash == std::string::npos) throw FormatError("window must be HH:MM-HH:MM: " + window);
    int start = parse_hhmm(w.substr(0, dash));
    int end = parse_hhmm(w.substr(dash + 1));
    int t = parse_hhmm(hhmm);
    if (start <= end) return start <= t && t <= end;
    return t >= start || t <= end;  // window wrapping past midnight
}

// ---------------------------------------------------------------------------
// Registry contract
// ---------------------------------------------------------------------------

namespace {

json record_to_json(const OnChainDidRecord& r) {
    return json{{"did", r.did.str()},
                {"version", r.version},
                {"doc_hash", r.doc_hash.hex()},
                {"registered_at", r.registered_at.block_height},
                {"revocation_status", r.revocation_status},
                {"controller_address", r.controller_address}};
}

OnChainDidRecord record_from_json(const json& j) {
    OnChainDidRecord r;
    r.did = parse_did(j.at("did").get<std::string>());
    r.version = j.at("version").get<uint64_t>();
    r.doc_hash = Digest::from_hex_str(j.at("doc_hash").get<std::string>());
    r.registered_at = LedgerTime::at(j.at("registered_at").get<uint64_t>());
    r.revocation_status = j.at("revocation_status").get<bool>();
    r.controller_address = j.at("controller_address").get<std::string>();
    return r;
}

void registry_handler(ContractContext& ctx) {
    json p = json::parse(to_string(BytesView(ctx.payload().data(), ctx.payload().size())));
    std::string op = p.at("op").get<std::string>();
    std::string did_str = p.at("did").get<std::string>();
    if (!is_valid_did_string(did_str)) throw FormatError("malformed did string: " + did_str);
    Did did = parse_did(did_str);

    auto existing = ctx.get(DidRegistry::kNamespace, did.str());

    if (op == "register") {
        if (existing) throw DuplicateError("did already registered: " + did.str());
        OnChainDidRecord rec;
        rec.did = did;
        rec.version = 1;
        rec.doc_hash = Digest::from_hex_str(p.at("doc_hash").get<std::string>());
        rec.registered_at = ctx.now();
        rec.revocation_status = false;
        rec.controller_address = ctx.submitter_address();
        ctx.put(DidRegistry::kNamespace, did.str(), record_to_json(rec).dump());
        ctx.emit("DIDCreated", {{"did", did.str()}, {"doc_hash", rec.doc_hash.hex()}});
        return;
    }

    if (!existing) throw NotFoundError("did not registered: " + did.str());
    OnChainDidRecord rec = record_from_json(json::parse(*existing));

    if (op == "sync_update") {
        // governance write-through; only reachable from another contract
        if (!ctx.is_internal_call()) throw AuthError("direct registry updates are not allowed");
        if (rec.revocation_status) throw FinalityError("did is revoked: " + did.str());
        rec.version += 1;
        rec.doc_hash = Digest::from_hex_str(p.at("doc_hash").get<std::string>());
        ctx.put(DidRegistry::kNamespace, did.str(), record_to_json(rec).dump());
        ctx.emit("DIDUpdated", {{"did", did.str()}, {"doc_hash", rec.doc_hash.hex()}, {"version", std::to_string(rec.version)}});
        return;
    }
    if (op == "set_revoked") {
        if (!ctx.is_internal_call()) throw AuthError("direct revocation is not allowed");
        rec.revocation_status = true;
        ctx.put(DidRegistry::kNamespace, did.str(), record_to_json(rec).dump());
        ctx.emit("DIDRevoked", {{"did", did.str()}});
        return;
    }
    throw DispatchError("unknown did_registry op: " + op);
}

}  // namespace

DidRegistry::DidRegistry(Ledger& ledger, Cas& cas) : ledger_(ledger), cas_(cas) { install(ledger); }

void DidRegistry::install(Ledger& ledger) {
    if (!ledger.has_contract(kContract)) ledger.register_contract(kContract, registry_handler);
}

OnChainDidRecord DidRegistry::register_did(const DidDocument& doc, const KeyPair& controller) {
    if (doc.public_keys.empty()) throw FormatError("document lists no public keys");

    // rogue-key defense: aggregatable keys register only with a valid proof
    // of possession
    for (const auto& key : doc.public_keys) {
        if (key.scheme != Scheme::Aggregatable) continue;
        if (key.possession_proof.empty())
            throw KeyError("aggregatable key " + key.id + " lacks a proof of possession");
        if (!verify_possession(BytesView(key.public_key.data(), key.public_key.size()),
                               BytesView(key.possession_proof.data(), key.possession_proof.size())))
            throw KeyError("aggregatable key " + key.id + " has an invalid proof of possession");
    }

    // A registration not submitted by the first key holder must carry a
    // verifiable self-signature.
    bool submitter_is_first_holder =
        doc.public_keys[0].scheme == Scheme::Standard && doc.public_keys[0].public_key == controller.public_key;
    if (doc.proof) {
        const DidKey* vk = doc.find_key(doc.proof->verification_method);
        if (!vk) throw KeyError("proof verification method not present in document");
        Bytes msg = document_proof_bytes(doc);
        Signature sig{scheme_of_proof_type(doc.proof->type), doc.proof->value};
        if (!verify(vk->scheme, BytesView(vk->public_key.data(), vk->public_key.size()),
                    BytesView(msg.data(), msg.size()), sig)) {
            throw IntegrityError("document proof does not verify");
        }
    } else if (!submitter_is_first_holder) {
        throw AuthError("registration by a non-holder requires a document proof");
    }

    Bytes canon = canonical_document_bytes(doc);
    ContentId cid = cas_.put(canon);

    json payload{{"op", "register"}, {"did", doc.id.str()}, {"doc_hash", cid.digest.hex()}};
    Receipt r = ledger_.submit(kContract, to_bytes(payload.dump()), controller, doc.id.str());
    if (!r.ok) {
        if (r.error.find("already registered") != std::string::npos) throw DuplicateError(r.error);
        if (r.error.find("malformed did") != std::string::npos) throw FormatError(r.error);
        throw ValidationError(r.error);
    }
    return resolve(doc.id);
}

std::optional<OnChainDidRecord> DidRegistry::read_record(const Ledger& ledger, const Did& did) {
    auto raw = ledger.state_get(kNamespace, did.str());
    if (!raw) return std::nullopt;
    return record_from_json(json::parse(*raw));
}

void DidRegistry::enable_resolution_cache(uint64_t ttl_ticks) {
    cache_ttl_ = ttl_ticks;
    cache_.clear();
}

void DidRegistry::disable_resolution_cache() {
    cache_ttl_.reset();
    cache_.clear();
}

OnChainDidRecord DidRegistry::resolve(const Did& did) const {
    if (cache_ttl_) {
        uint64_t now = ledger_.current_time().logical_timestamp;
        auto it = cache_.find(did.str());
        if (it != cache_.end() && now - it->second.cached_at <= *cache_ttl_) return it->second.record;
        auto rec = read_record(ledger_, did);
        if (!rec) throw NotFoundError("did not registered: " + did.str());
        cache_[did.str()] = CacheEntry{*rec, now};
        return *rec;
    }
    auto rec = read_record(ledger_, did);
    if (!rec) throw NotFoundError("did not registered: " + did.str());
    return *rec;
}

DidDocument DidRegistry::fetch_document(const Did& did) const {
    OnChainDidRecord rec = resolve(did);
    Bytes content = cas_.get(ContentId{rec.doc_hash});
    if (sha256(content) != rec.doc_hash)
        throw IntegrityError("document bytes do not match the on-chain hash for " + did.str());
    return document_from_json(json::parse(to_string(BytesView(content.data(), content.size()))));
}

SignedMessage DidRegistry::sign_message(const Did& sender, const KeyPair& key, BytesView payload) const {
    DidDocument doc = fetch_document(sender);
    const DidKey* match = nullptr;
    for (const auto& k : doc.public_keys) {
        if (k.scheme == key.scheme && k.public_key == key.public_key) {
            match = &k;
            break;
        }
    }
    if (!match) throw KeyError("signing key is not listed in the sender's document");
    SignedMessage msg;
    msg.sender = sender;
    msg.payload.assign(payload.begin(), payload.end());
    msg.signature = sign(key, payload);
    msg.key_id = match->id;
    return msg;
}

VerifyDecision DidRegistry::verify_message(const SignedMessage& msg, const std::string& requested_action,
                                           const RequestContext& context) const {
    return verify_against(ledger_, cas_, msg, requested_action, context);
}

VerifyDecision DidRegistry::verify_against(const Ledger& ledger, const Cas& cas, const SignedMessage& msg,
                                           const std::string& requested_action,
                                           const RequestContext& context) {
    auto rec = read_record(ledger, msg.sender);
    if (!rec) return VerifyDecision::reject(RejectReason::UnknownSender, "sender did is not registered");
    if (rec->revocation_status)
        return VerifyDecision::reject(RejectReason::Revoked, "sender did is revoked");

    // Integrity: off-chain document bytes must hash to the on-chain anchor.
    Bytes content;
    try {
        content = cas.get(ContentId{rec->doc_hash});
    } catch (const NotFoundError&) {
        return VerifyDecision::reject(RejectReason::Integrity, "document missing from storage");
    }
    if (sha256(content) != rec->doc_hash)
        return VerifyDecision::reject(RejectReason::Integrity, "document hash mismatch");
    DidDocument doc;
    try {
        doc = document_from_json(json::parse(to_string(BytesView(content.data(), content.size()))));
    } catch (const std::exception&) {
        return VerifyDecision::reject(RejectReason::Integrity, "document does not parse");
    }

    // Ownership: signature under the key named by the message.
    const DidKey* key = doc.find_key(msg.key_id);
    if (!key) return VerifyDecision::reject(RejectReason::Ownership, "key id not in document");
    bool sig_ok = false;
    try {
        sig_ok = verify(key->scheme, BytesView(key->public_key.data(), key->public_key.size()),
                        BytesView(msg.payload.data(), msg.payload.size()), msg.signature);
    } catch (const SchemeError&) {
        sig_ok = false;
    }
    if (!sig_ok) return VerifyDecision::reject(RejectReason::Ownership, "signature does not verify");

    // Permissions: capability list plus policy constraints, both only when set.
    if (doc.capabilities.contains("permissions")) {
        bool found = false;
        for (const auto& perm : doc.capabilities.at("permissions")) {
            if (perm.is_string() && perm.get<std::string>() == requested_action) {
                found = true;
                break;
            }
        }
        if (!found)
            return VerifyDecision::reject(RejectReason::Permissions,
                                          "action '" + requested_action + "' not in capabilities.permissions");
    }
    if (doc.policy_constraints.contains("max_data_size")) {
        uint64_t cap = parse_data_size(doc.policy_constraints.at("max_data_size").get<std::string>());
        if (msg.payload.size() > cap)
            return VerifyDecision::reject(RejectReason::Permissions, "payload exceeds max_data_size");
    }
    if (doc.policy_constraints.contains("allowed_interaction_hours")) {
        auto it = context.find("time");
        if (it != context.end()) {
            if (!time_within_daily_window(doc.policy_constraints.at("allowed_interaction_hours").get<std::string>(),
                                          it->second)) {
                return VerifyDecision::reject(RejectReason::Permissions, "outside allowed interaction hours");
            }
        }
    }
    return VerifyDecision::accept();
}

}  // namespace blocka2a
