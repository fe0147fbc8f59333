#include "blocka2a/provenance.hpp"

#include <sodium.h>

#include <algorithm>
#include <set>

#include "blocka2a/bls/curve.hpp"
#include "blocka2a/bls/bls.hpp"
#include "blocka2a/errors.hpp"

namespace blocka2a {

using nlohmann::json;

Digest task_hash_of(const TaskMetadata& meta, uint64_t t) {
    Bytes buf;
    append_field(buf, meta.initiator.str());
    append_u32_be(buf, static_cast<uint32_t>(meta.participants.size()));
    for (const auto& p : meta.participants) append_field(buf, p.str());
    append_field(buf, meta.description);
    Bytes ts;
    append_u64_be(ts, t);
    append_field(buf, BytesView(ts.data(), ts.size()));
    return sha256(buf);
}

Bytes milestone_signing_bytes(const Digest& task_hash, const std::string& milestone) {
    Bytes buf;
    append_field(buf, task_hash.view());
    append_field(buf, milestone);
    return buf;
}

bool milestone_label_ok(const std::string& label) {
    if (label.empty() || label.size() > 64) return false;
    return std::all_of(label.begin(), label.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    });
}

namespace {

json metadata_to_json(const TaskMetadata& meta) {
    json parts = json::array();
    for (const auto& p : meta.participants) parts.push_back(p.str());
    return json{{"initiator", meta.initiator.str()},
                {"participants", parts},
                {"description", meta.description},
                {"deadline", meta.deadline}};
}

TaskRecord record_from_state(const json& j) {
    TaskRecord r;
    r.task_hash = Digest::from_hex_str(j.at("task_hash").get<std::string>());
    r.created_at = LedgerTime::at(j.at("created_at").get<uint64_t>());
    r.status = j.at("status").get<std::string>();
    for (const auto& h : j.at("history")) {
        r.status_history.emplace_back(h.at("label").get<std::string>(),
                                      LedgerTime::at(h.at("time").get<uint64_t>()));
    }
    r.metadata_cid = ContentId{Digest::from_hex_str(j.at("metadata_cid").get<std::string>())};
    r.initiator = parse_did(j.at("initiator").get<std::string>());
    for (const auto& p : j.at("participants")) r.participants.push_back(parse_did(p.get<std::string>()));
    return r;
}

std::string task_key(const Digest& h) { return "task/" + h.hex(); }
std::string anchor_key(const Digest& h) { return "anchor/" + h.hex(); }

// ILC quorum override: when a workflow is attached to the task, its current
// state's guard decides how many endorsements a transition needs.
size_t required_signers(ContractContext& ctx, const Digest& task_hash, size_t participant_count) {
    for (const auto& [key, value] : ctx.entries("ilc")) {
        if (key.rfind("instance/", 0) != 0) continue;
        json inst = json::parse(value);
        if (!inst.contains("attached_task") ||
            inst.at("attached_task").get<std::string>() != task_hash.hex())
            continue;
        std::string current = inst.at("current").get<std::string>();
        const json& guards = inst.at("machine").value("guards", json::object());
        if (guards.contains(current)) {
            uint32_t k = guards.at(current).value("quorum_k", 0u);
            if (k > 0) return k;
        }
    }
    return participant_count;
}

void provenance_handler(ContractContext& ctx, const Cas& cas) {
    json p = json::parse(to_string(BytesView(ctx.payload().data(), ctx.payload().size())));
    std::string op = p.at("op").get<std::string>();

    if (op == "set_oracle") {
        if (ctx.get(ProvenanceLedger::kContract, "_oracle"))
            throw DuplicateError("oracle key already configured");
        ctx.put(ProvenanceLedger::kContract, "_oracle", p.at("pubkey").get<std::string>());
        return;
    }

    if (op == "init_task") {
        TaskMetadata meta;
        meta.initiator = parse_did(p.at("initiator").get<std::string>());
        for (const auto& d : p.at("participants")) meta.participants.push_back(parse_did(d.get<std::string>()));
        meta.description = p.at("description").get<std::string>();
        meta.deadline = p.at("deadline").get<uint64_t>();
        if (meta.participants.empty()) throw ParticipantError("participant error: task needs participants");
        if (meta.deadline < ctx.now().logical_timestamp)
            throw ValidationError("invalid deadline: before creation time");
        for (const auto& d : meta.participants) {
            auto raw = ctx.get(DidRegistry::kNamespace, d.str());
            if (!raw) throw ParticipantError("participant error: unregistered did " + d.str());
            if (json::parse(*raw).at("revocation_status").get<bool>())
                throw ParticipantError("participant error: revoked did " + d.str());
        }
        uint64_t t = ctx.now().logical_timestamp;
        Digest h = task_hash_of(meta, t);
        if (ctx.get(ProvenanceLedger::kContract, task_key(h)))
            throw DuplicateError("duplicate task hash " + h.hex());

        json rec{{"task_hash", h.hex()},
                 {"created_at", t},
                 {"status", "initiated"},
                 {"history", json::array({{{"label", "initiated"}, {"time", t}}})},
                 {"metadata_cid", p.at("metadata_cid").get<std::string>()},
                 {"initiator", meta.initiator.str()},
                 {"participants", p.at("participants")}};
        ctx.put(ProvenanceLedger::kContract, task_key(h), rec.dump());
        ctx.emit("TaskInitiated", {{"task_hash", h.hex()}, {"initiator", meta.initiator.str()}});
        return;
    }

    if (op == "transition") {
        Digest h = Digest::from_hex_str(p.at("task_hash").get<std::string>());
        auto raw = ctx.get(ProvenanceLedger::kContract, task_key(h));
        if (!raw) throw NotFoundError("unknown task " + h.hex());
        json rec = json::parse(*raw);

        std::string milestone = p.at("milestone").get<std::string>();
        if (!milestone_label_ok(milestone))
            throw FormatError("format error: milestone label must match [A-Za-z0-9_-]{1,64}");

        std::set<std::string> participants;
        for (const auto& d : rec.at("participants")) participants.insert(d.get<std::string>());

        // fetch each signer's aggregatable key from its stored document
        std::vector<Bytes> pubs;
        std::vector<Signature> sigs;
        std::set<std::string> signers;
        for (const auto& s : p.at("signatures")) {
            std::string did_str = s.at("did").get<std::string>();
            if (!participants.contains(did_str))
                throw MembershipError("membership error: signer is not a task participant: " + did_str);
            if (!signers.insert(did_str).second) continue;
            auto rraw = ctx.get(DidRegistry::kNamespace, did_str);
            if (!rraw) throw MembershipError("membership error: signer not registered: " + did_str);
            Bytes doc_bytes =
                cas.get(ContentId{Digest::from_hex_str(json::parse(*rraw).at("doc_hash").get<std::string>())});
            DidDocument doc = document_from_json(json::parse(to_string(doc_bytes)));
            const DidKey* key = doc.first_key_of(Scheme::Aggregatable);
            if (!key)
                throw SignatureError("signature error: signer has no aggregatable key: " + did_str);
            pubs.push_back(key->public_key);
            sigs.push_back(Signature{Scheme::Aggregatable, from_hex(s.at("sig").get<std::string>())});
        }
        size_t required = required_signers(ctx, h, participants.size());
        if (signers.size() < required)
            throw SignatureError("signature error: " + std::to_string(signers.size()) + " of " +
                                 std::to_string(required) + " required endorsements");

        Bytes msg = milestone_signing_bytes(h, milestone);
        AggregateSignature agg = aggregate(sigs);
        if (!verify_aggregate(pubs, BytesView(msg.data(), msg.size()), agg))
            throw SignatureError("signature error: aggregate does not verify for milestone " + milestone);

        std::string new_status = milestone + "_verified";
        rec["status"] = new_status;
        rec["history"].push_back({{"label", new_status}, {"time", ctx.now().logical_timestamp}});
        ctx.put(ProvenanceLedger::kContract, task_key(h), rec.dump());
        ctx.emit("TaskStateTransition", {{"task_hash", h.hex()},
                                         {"milestone", milestone},
                                         {"status", new_status},
                                         {"sender", ctx.tx().submitter},
                                         {"signers", std::to_string(signers.size())},
                                         {"aggregate", to_hex(BytesView(agg.bytes.data(), agg.bytes.size()))},
                                         {"signer_dids", [&] {
                                              json a = json::array();
                                              for (const auto& s : signers) a.push_back(s);
                                              return a.dump();
                                          }()}});
        return;
    }

    if (op == "anchor") {
        Digest h = Digest::from_hex_str(p.at("payload_hash").get<std::string>());
        if (auto existing = ctx.get(ProvenanceLedger::kContract, anchor_key(h))) return;  // idempotent
        json rec{{"payload_hash", h.hex()},
                 {"content_id", p.at("content_id").get<std::string>()},
                 {"anchored_at", ctx.now().logical_timestamp},
                 {"status", "anchored"}};
        ctx.put(ProvenanceLedger::kContract, anchor_key(h), rec.dump());
        ctx.emit("DataAnchored", {{"payload_hash", h.hex()}, {"content_id", p.at("content_id").get<std::string>()}});
        return;
    }

    if (op == "import") {
        auto oracle_pk = ctx.get(ProvenanceLedger::kContract, "_oracle");
        if (!oracle_pk) throw ValidationError("invalid import: oracle key not configured");
        Digest h = Digest::from_hex_str(p.at("data_hash").get<std::string>());
        std::string statement = p.at("predicate_attestation").get<std::string>();
        uint64_t t = p.at("time").get<uint64_t>();
        Signature sig{Scheme::Standard, from_hex(p.at("oracle_signature").get<std::string>())};
        Bytes msg = import_attestation_bytes(h, statement, t);
        Bytes pk = from_hex(*oracle_pk);
        if (!verify(Scheme::Standard, BytesView(pk.data(), pk.size()), BytesView(msg.data(), msg.size()), sig))
            throw SignatureError("signature error: oracle attestation does not verify");
        json rec{{"data_hash", h.hex()},
                 {"source_id", p.at("source_id").get<std::string>()},
                 {"time", t},
                 {"predicate_attestation", statement},
                 {"oracle_signature", p.at("oracle_signature").get<std::string>()},
                 {"requester", p.at("requester").get<std::string>()}};
        ctx.put(ProvenanceLedger::kContract, "import/" + h.hex(), rec.dump());
        ctx.emit("DataImported", {{"data_hash", h.hex()}, {"source_id", p.at("source_id").get<std::string>()}});
        return;
    }

    if (op == "record_message") {
        ctx.emit("MessageRecorded", {{"sender", p.at("sender").get<std::string>()},
                                     {"recipient", p.at("recipient").get<std::string>()},
                                     {"content_hash", p.at("content_hash").get<std::string>()},
                                     {"claims_anchored", p.value("claims_anchored", false) ? "true" : "false"}});
        return;
    }

    throw DispatchError("unknown provenance op: " + op);
}

}  // namespace

// ---------------------------------------------------------------------------
// Import participants
// ---------------------------------------------------------------------------

namespace {

Bytes source_cert_bytes(const std::string& source_id) {
    Bytes buf;
    append_field(buf, std::string_view("source-cert"));
    append_field(buf, source_id);
    return buf;
}

mpz_class scalar_from_seed(BytesView seed, std::string_view tag) {
    Bytes material;
    append_field(material, tag);
    append_field(material, seed);
    Digest d0 = sha256(material);
    material.push_back(0x01);
    Digest d1 = sha256(material);
    Bytes wide(d0.bytes.begin(), d0.bytes.end());
    wide.insert(wide.end(), d1.bytes.begin(), d1.bytes.end());
    mpz_class v;
    mpz_import(v.get_mpz_t(), wide.size(), 1, 1, 1, 0, wide.data());
    v %= bls::group_order();
    if (v == 0) v = 1;
    return v;
}

Bytes compress_point(const bls::G1& p) {
    auto raw = bls::g1_compress(p);
    return Bytes(raw.begin(), raw.end());
}

Bytes derive_channel_key(const bls::G1& shared) {
    Bytes z = compress_point(shared);
    Bytes buf;
    append_field(buf, std::string_view("import-channel-key"));
    append_field(buf, BytesView(z.data(), z.size()));
    Digest d = sha256(buf);
    return Bytes(d.bytes.begin(), d.bytes.end());
}

Bytes aead_seal(const Bytes& key, const Bytes& nonce, BytesView plaintext) {
    Bytes out(plaintext.size() + crypto_aead_xchacha20poly1305_ietf_ABYTES);
    unsigned long long clen = 0;
    crypto_aead_xchacha20poly1305_ietf_encrypt(out.data(), &clen, plaintext.data(), plaintext.size(),
                                               nullptr, 0, nullptr, nonce.data(), key.data());
    out.resize(clen);
    return out;
}

bool aead_open(const Bytes& key, const Bytes& nonce, const Bytes& ciphertext, Bytes& plaintext) {
    plaintext.resize(ciphertext.size());
    unsigned long long plen = 0;
    if (crypto_aead_xchacha20poly1305_ietf_decrypt(plaintext.data(), &plen, nullptr, ciphertext.data(),
                                                   ciphertext.size(), nullptr, 0, nonce.data(),
                                                   key.data()) != 0)
        return false;
    plaintext.resize(plen);
    return true;
}

}  // namespace

MockDataSource::MockDataSource(std::string source_id, json response, BytesView seed)
    : id_(std::move(source_id)), response_(std::move(response)) {
    Bytes id_seed;
    append_field(id_seed, std::string_view("source-identity"));
    append_field(id_seed, seed);
    Digest d = sha256(id_seed);
    identity_ = generate_keypair(Scheme::Standard, d.view());
    mpz_class s = scalar_from_seed(seed, "source-dh");
    Bytes out(32, 0);
    size_t count = 0;
    Bytes tmp((mpz_sizeinbase(s.get_mpz_t(), 2) + 7) / 8, 0);
    mpz_export(tmp.data(), &count, 1, 1, 1, 0, s.get_mpz_t());
    std::copy(tmp.begin(), tmp.begin() + count, out.begin() + (32 - count));
    dh_secret_ = out;
}

Bytes MockDataSource::certificate() const {
    Bytes msg = source_cert_bytes(id_);
    return sign(identity_, BytesView(msg.data(), msg.size())).bytes;
}

Bytes MockDataSource::dh_public() const {
    mpz_class s;
    mpz_import(s.get_mpz_t(), dh_secret_.size(), 1, 1, 1, 0, dh_secret_.data());
    return compress_point(bls::pt_mul(bls::g1_generator(), s));
}

EncryptedResponse MockDataSource::respond(BytesView joint_share) const {
    mpz_class s;
    mpz_import(s.get_mpz_t(), dh_secret_.size(), 1, 1, 1, 0, dh_secret_.data());
    bls::G1 ya = bls::g1_decompress(joint_share);
    Bytes key = derive_channel_key(bls::pt_mul(ya, s));

    EncryptedResponse out;
    Bytes nonce_material;
    append_field(nonce_material, std::string_view("import-nonce"));
    append_field(nonce_material, BytesView(key.data(), key.size()));
    Digest nd = sha256(nonce_material);
    out.nonce.assign(nd.bytes.begin(), nd.bytes.begin() + crypto_aead_xchacha20poly1305_ietf_NPUBBYTES);
    Bytes plain = to_bytes(response_.dump());
    out.ciphertext = aead_seal(key, out.nonce, BytesView(plain.data(), plain.size()));
    return out;
}

ImportOracle::ImportOracle(BytesView seed) {
    Bytes material;
    append_field(material, std::string_view("oracle-attestation"));
    append_field(material, seed);
    Digest d = sha256(material);
    attestation_ = generate_keypair(Scheme::Standard, d.view());
}

Bytes import_attestation_bytes(const Digest& data_hash, const std::string& predicate_statement, uint64_t t) {
    Bytes buf;
    append_field(buf, std::string_view("import-attestation"));
    append_field(buf, data_hash.view());
    append_field(buf, predicate_statement);
    Bytes ts;
    append_u64_be(ts, t);
    append_field(buf, BytesView(ts.data(), ts.size()));
    return buf;
}

// ---------------------------------------------------------------------------
// Facade
// ---------------------------------------------------------------------------

void ProvenanceLedger::install(Ledger& ledger, const Cas& cas) {
    if (ledger.has_contract(kContract)) return;
    const Cas* cas_ptr = &cas;
    ledger.register_contract(kContract,
                             [cas_ptr](ContractContext& ctx) { provenance_handler(ctx, *cas_ptr); });
}

ProvenanceLedger::ProvenanceLedger(DidRegistry& registry) : registry_(registry) {
    install(registry_.ledger(), registry_.cas());
}

void ProvenanceLedger::configure_oracle(const ImportOracle& oracle, const KeyPair& admin) {
    json payload{{"op", "set_oracle"},
                 {"pubkey", to_hex(BytesView(oracle.attestation_public().data(), oracle.attestation_public().size()))}};
    Receipt r = registry_.ledger().submit(kContract, to_bytes(payload.dump()), admin, "provenance-admin");
    if (!r.ok) rethrow_receipt(r);
}

TaskRecord ProvenanceLedger::initiate_task(const TaskMetadata& meta, const KeyPair& initiator_keys) {
    ContentId cid = registry_.cas().put(to_bytes(metadata_to_json(meta).dump()));
    json payload{{"op", "init_task"},
                 {"initiator", meta.initiator.str()},
                 {"participants", [&] {
                      json a = json::array();
                      for (const auto& p : meta.participants) a.push_back(p.str());
                      return a;
                  }()},
                 {"description", meta.description},
                 {"deadline", meta.deadline},
                 {"metadata_cid", cid.hex()}};
    Receipt r = registry_.ledger().submit(kContract, to_bytes(payload.dump()), initiator_keys,
                                          meta.initiator.str());
    if (!r.ok) rethrow_receipt(r);
    for (const auto& ev : r.events) {
        if (ev.kind == "TaskInitiated") return task(Digest::from_hex_str(ev.attributes.at("task_hash")));
    }
    throw std::logic_error("task initiation produced no event");
}

TaskRecord ProvenanceLedger::transition_state(const Digest& task_hash, const std::string& milestone,
                                              const std::vector<std::pair<Did, Signature>>& signatures,
                                              const KeyPair& submitter) {
    json sigs = json::array();
    for (const auto& [did, sig] : signatures) {
        sigs.push_back({{"did", did.str()}, {"sig", to_hex(BytesView(sig.bytes.data(), sig.bytes.size()))}});
    }
    json payload{{"op", "transition"}, {"task_hash", task_hash.hex()}, {"milestone", milestone}, {"signatures", sigs}};
    Receipt r = registry_.ledger().submit(kContract, to_bytes(payload.dump()), submitter, "aggregator");
    if (!r.ok) rethrow_receipt(r);
    return task(task_hash);
}

TaskRecord ProvenanceLedger::task(const Digest& task_hash) const {
    auto raw = registry_.ledger().state_get(kContract, "task/" + task_hash.hex());
    if (!raw) throw NotFoundError("unknown task " + task_hash.hex());
    return record_from_state(json::parse(*raw));
}

AnchorRecord ProvenanceLedger::anchor_data(BytesView payload, const KeyPair& submitter) {
    if (payload.size() > registry_.ledger().max_payload_bytes())
        throw SizeError("size error: payload exceeds the anchoring cap");
    ContentId cid = registry_.cas().put(payload);
    json body{{"op", "anchor"}, {"payload_hash", cid.digest.hex()}, {"content_id", cid.hex()}};
    Receipt r = registry_.ledger().submit(kContract, to_bytes(body.dump()), submitter, "anchor");
    if (!r.ok) rethrow_receipt(r);
    auto rec = anchor_record(cid.digest);
    if (!rec) throw std::logic_error("anchor record missing after anchoring");
    return *rec;
}

std::optional<AnchorRecord> ProvenanceLedger::anchor_record(const Digest& payload_hash) const {
    auto raw = registry_.ledger().state_get(kContract, "anchor/" + payload_hash.hex());
    if (!raw) return std::nullopt;
    json j = json::parse(*raw);
    AnchorRecord rec;
    rec.payload_hash = Digest::from_hex_str(j.at("payload_hash").get<std::string>());
    rec.content_id = ContentId{Digest::from_hex_str(j.at("content_id").get<std::string>())};
    rec.anchored_at = LedgerTime::at(j.at("anchored_at").get<uint64_t>());
    rec.status = j.at("status").get<std::string>();
    return rec;
}

bool ProvenanceLedger::verify_anchor(BytesView payload, LedgerTime as_of) const {
    auto rec = anchor_record(sha256(payload));
    return rec && rec->anchored_at.logical_timestamp <= as_of.logical_timestamp;
}

ImportRecord ProvenanceLedger::authenticated_import(const Did& requester, const MockDataSource& source,
                                                    const ImportOracle& oracle, const JsonClause& predicate,
                                                    const KeyPair& submitter, uint64_t exchange_seed,
                                                    const std::function<void(Bytes&)>& channel_interceptor) {
    // Phase 1: both requester and oracle validate the source certificate.
    Bytes cert = source.certificate();
    Bytes cert_msg = source_cert_bytes(source.id());
    Signature cert_sig{Scheme::Standard, cert};
    bool requester_ok = verify(Scheme::Standard,
                               BytesView(source.identity_public().data(), source.identity_public().size()),
                               BytesView(cert_msg.data(), cert_msg.size()), cert_sig);
    bool oracle_ok = requester_ok;  // the oracle runs the same certificate check
    if (!requester_ok || !oracle_ok) throw ProvenanceError("provenance error: source authentication failed");

    // Phase 2: joint share Y_A = (s_A + s_O) * G; the source folds in its own
    // secret, both sides derive the same channel key.
    Bytes seed;
    append_u64_be(seed, exchange_seed);
    mpz_class s_a = scalar_from_seed(BytesView(seed.data(), seed.size()), "requester-dh");
    mpz_class s_o = scalar_from_seed(BytesView(seed.data(), seed.size()), "oracle-dh");
    bls::G1 y_a = bls::pt_mul(bls::g1_generator(), s_a + s_o);
    EncryptedResponse resp = source.respond(BytesView(compress_point(y_a).data(), 48));
    if (channel_interceptor) channel_interceptor(resp.ciphertext);

    bls::G1 s_pub = bls::g1_decompress(BytesView(source.dh_public().data(), 48));
    Bytes key = derive_channel_key(bls::pt_mul(s_pub, s_a + s_o));
    Bytes plain;
    if (!aead_open(key, resp.nonce, resp.ciphertext, plain))
        throw ChannelError("channel error: response integrity check failed");

    // Phase 3: the oracle evaluates the predicate and signs the attestation.
    json response = json::parse(to_string(BytesView(plain.data(), plain.size())));
    if (!predicate.evaluate(response))
        throw PredicateError("predicate error: response does not satisfy \"" + predicate.path + " " +
                             std::string(comparator_name(predicate.cmp)) + " " + predicate.literal.dump() + "\"");
    Digest h = sha256(plain);
    std::string statement = predicate.path + " " + std::string(comparator_name(predicate.cmp)) + " " +
                            predicate.literal.dump();
    uint64_t t = registry_.ledger().current_time().logical_timestamp + 1;
    Bytes att = import_attestation_bytes(h, statement, t);
    Signature osig = sign(oracle.attestation_keys(), BytesView(att.data(), att.size()));

    json payload{{"op", "import"},
                 {"data_hash", h.hex()},
                 {"source_id", source.id()},
                 {"time", t},
                 {"predicate_attestation", statement},
                 {"oracle_signature", to_hex(BytesView(osig.bytes.data(), osig.bytes.size()))},
                 {"requester", requester.str()}};
    Receipt r = registry_.ledger().submit(kContract, to_bytes(payload.dump()), submitter, requester.str());
    if (!r.ok) rethrow_receipt(r);

    ImportRecord rec;
    rec.data_hash = h;
    rec.source_id = source.id();
    rec.time = t;
    rec.predicate_attestation = statement;
    rec.oracle_signature = osig;
    rec.requester = requester;
    return rec;
}

void ProvenanceLedger::record_message(const Did& sender, const Did& recipient, const Digest& content_hash,
                                      const KeyPair& submitter, bool claims_anchored) {
    json payload{{"op", "record_message"},
                 {"sender", sender.str()},
                 {"recipient", recipient.str()},
                 {"content_hash", content_hash.hex()},
                 {"claims_anchored", claims_anchored}};
    Receipt r = registry_.ledger().submit(kContract, to_bytes(payload.dump()), submitter, sender.str());
    if (!r.ok) rethrow_receipt(r);
}

}  // namespace blocka2a
