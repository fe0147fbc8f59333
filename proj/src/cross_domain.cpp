#include "blocka2a/cross_domain.hpp"

#include <fstream>
#include <set>

#include "blocka2a/errors.hpp"

namespace blocka2a {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Trust anchor bridge
// ---------------------------------------------------------------------------

Bytes cross_chain_document_signing_bytes(const DidDocument& doc) {
    Bytes buf;
    append_field(buf, std::string_view("cross-chain-doc"));
    Bytes canon = canonical_document_bytes(doc);
    append_field(buf, BytesView(canon.data(), canon.size()));
    return buf;
}

namespace {

std::string anchor_store_key(const Digest& doc_hash, const std::string& source_chain) {
    return "anchor/" + doc_hash.hex() + "@" + source_chain;
}

void bridge_handler(ContractContext& ctx) {
    json p = json::parse(to_string(BytesView(ctx.payload().data(), ctx.payload().size())));
    std::string op = p.at("op").get<std::string>();
    if (op != "store_anchor") throw DispatchError("unknown trust_anchor op: " + op);

    Digest doc_hash = Digest::from_hex_str(p.at("doc_hash").get<std::string>());
    std::string source_chain = p.at("source_chain").get<std::string>();
    std::string key = anchor_store_key(doc_hash, source_chain);
    if (ctx.get(TrustAnchorBridge::kContract, key)) return;  // idempotent relay

    json entry{{"doc_hash", doc_hash.hex()},
               {"source_chain", source_chain},
               {"block_number", p.at("block_number").get<uint64_t>()},
               {"relayed_at", ctx.now().logical_timestamp}};
    ctx.put(TrustAnchorBridge::kContract, key, entry.dump());
    ctx.emit("AnchorRelayed", {{"doc_hash", doc_hash.hex()}, {"source_chain", source_chain}});
}

AnchorStoreEntry entry_from_json(const json& j) {
    AnchorStoreEntry e;
    e.doc_hash = Digest::from_hex_str(j.at("doc_hash").get<std::string>());
    e.source_chain = j.at("source_chain").get<std::string>();
    e.block_number = LedgerTime::at(j.at("block_number").get<uint64_t>());
    e.relayed_at = LedgerTime::at(j.at("relayed_at").get<uint64_t>());
    return e;
}

}  // namespace

void TrustAnchorBridge::install(Ledger& ledger) {
    if (!ledger.has_contract(kContract)) ledger.register_contract(kContract, bridge_handler);
}

AnchorStoreEntry TrustAnchorBridge::relay_anchor(Ledger& source, Ledger& dest, const Did& did,
                                                 const KeyPair& submitter) {
    auto rec = DidRegistry::read_record(source, did);
    if (!rec) throw RelayError("relay error: did not registered on source chain: " + did.str());
    // single-node chains have no forks; consensus proof degenerates to the
    // record existing at its claimed registration height
    if (rec->registered_at.block_height > source.current_time().block_height)
        throw RelayError("relay error: source record claims a future block");

    install(dest);
    json payload{{"op", "store_anchor"},
                 {"doc_hash", rec->doc_hash.hex()},
                 {"source_chain", source.chain_id()},
                 {"block_number", rec->registered_at.block_height}};
    Receipt r = dest.submit(kContract, to_bytes(payload.dump()), submitter, "bridge");
    if (!r.ok) rethrow_receipt(r);
    auto entry = anchor_entry(dest, rec->doc_hash, source.chain_id());
    if (!entry) throw std::logic_error("anchor entry missing after relay");
    return *entry;
}

std::optional<AnchorStoreEntry> TrustAnchorBridge::anchor_entry(const Ledger& dest, const Digest& doc_hash,
                                                                const std::string& source_chain) {
    auto raw = dest.state_get(kContract, anchor_store_key(doc_hash, source_chain));
    if (!raw) return std::nullopt;
    return entry_from_json(json::parse(*raw));
}

bool TrustAnchorBridge::validate_cross_chain(const Ledger& dest, const DidDocument& doc, const Signature& sig,
                                             LedgerTime now, uint64_t tau_max, std::string* why) {
    const DidKey* key = doc.first_key_of(sig.scheme);
    Bytes msg = cross_chain_document_signing_bytes(doc);
    if (!key || !verify(sig.scheme, BytesView(key->public_key.data(), key->public_key.size()),
                        BytesView(msg.data(), msg.size()), sig)) {
        if (why) *why = "owner signature does not verify";
        return false;
    }

    Digest h = document_hash(doc);
    std::optional<AnchorStoreEntry> found;
    for (const auto& [k, v] : dest.state_entries(kContract)) {
        if (k.rfind("anchor/" + h.hex() + "@", 0) == 0) {
            found = entry_from_json(json::parse(v));
            break;
        }
    }
    if (!found) {
        if (why) *why = "document hash is not anchored";
        return false;
    }
    if (now.logical_timestamp < found->relayed_at.logical_timestamp ||
        now.logical_timestamp - found->relayed_at.logical_timestamp > tau_max) {
        if (why) *why = "anchor is stale";
        return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Legacy registry and oracle
// ---------------------------------------------------------------------------

void LegacyRegistry::load_json(const json& id_to_attributes) {
    for (const auto& [id, attrs] : id_to_attributes.items()) {
        std::map<std::string, std::string> m;
        for (const auto& [k, v] : attrs.items()) m[k] = v.is_string() ? v.get<std::string>() : v.dump();
        add(id, std::move(m));
    }
}

void LegacyRegistry::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open legacy registry file " + path);
    json j;
    in >> j;
    load_json(j);
}

void LegacyRegistry::add(const std::string& legacy_id, std::map<std::string, std::string> attributes) {
    entries_[legacy_id] = Entry{std::move(attributes), LegacyStatus{}};
}

bool LegacyRegistry::contains(const std::string& legacy_id) const { return entries_.contains(legacy_id); }

const std::map<std::string, std::string>& LegacyRegistry::attributes(const std::string& legacy_id) const {
    auto it = entries_.find(legacy_id);
    if (it == entries_.end()) throw NotFoundError("unknown legacy id: " + legacy_id);
    return it->second.attributes;
}

LegacyStatus LegacyRegistry::lookup(const std::string& legacy_id) const {
    auto it = entries_.find(legacy_id);
    if (it == entries_.end()) throw NotFoundError("unknown legacy id: " + legacy_id);
    return it->second.status;
}

LegacyStatus LegacyRegistry::decommission(const std::string& legacy_id, LegacyStatusKind kind,
                                          std::optional<Did> redirect) {
    auto it = entries_.find(legacy_id);
    if (it == entries_.end()) throw NotFoundError("unknown legacy id: " + legacy_id);
    it->second.status.kind = kind;
    it->second.status.redirect = (kind == LegacyStatusKind::Migrated) ? redirect : std::nullopt;
    return it->second.status;
}

Bytes attestation_signing_bytes(const std::string& legacy_id,
                                const std::map<std::string, std::string>& attributes) {
    Bytes buf;
    append_field(buf, std::string_view("legacy-attestation"));
    append_field(buf, legacy_id);
    append_u32_be(buf, static_cast<uint32_t>(attributes.size()));
    for (const auto& [k, v] : attributes) {
        append_field(buf, k);
        append_field(buf, v);
    }
    return buf;
}

LegacyOracle::LegacyOracle(LegacyRegistry& registry, BytesView seed) : registry_(registry) {
    Bytes material;
    append_field(material, std::string_view("legacy-oracle"));
    append_field(material, seed);
    keys_ = generate_keypair(Scheme::Standard, sha256(material).view());
}

OracleAttestation LegacyOracle::attest(const std::string& legacy_id, uint64_t timestamp) const {
    if (!registry_.contains(legacy_id))
        throw AttestationError("attestation error: oracle does not recognize " + legacy_id);
    auto status = registry_.lookup(legacy_id);
    if (status.kind != LegacyStatusKind::Active)
        throw AttestationError("attestation error: legacy identity is not active");
    OracleAttestation att;
    att.legacy_id = legacy_id;
    att.attributes = registry_.attributes(legacy_id);
    att.timestamp = timestamp;
    Bytes msg = attestation_signing_bytes(att.legacy_id, att.attributes);
    att.oracle_signature = sign(keys_, BytesView(msg.data(), msg.size()));
    return att;
}

bool LegacyOracle::verify_attestation(const OracleAttestation& att) const {
    Bytes msg = attestation_signing_bytes(att.legacy_id, att.attributes);
    return verify(Scheme::Standard, BytesView(keys_.public_key.data(), keys_.public_key.size()),
                  BytesView(msg.data(), msg.size()), att.oracle_signature);
}

// ---------------------------------------------------------------------------
// Migration committee
// ---------------------------------------------------------------------------

MigrationCommittee::MigrationCommittee(size_t n, size_t t, BytesView seed) : threshold_(t) {
    if (t == 0 || t > n) throw ArgumentError("committee threshold must be in [1, n]");
    for (size_t i = 0; i < n; i++) {
        Bytes material;
        append_field(material, std::string_view("committee-member"));
        append_field(material, seed);
        append_u32_be(material, static_cast<uint32_t>(i));
        members_.push_back(generate_keypair(Scheme::Aggregatable, sha256(material).view()));
    }
}

std::vector<Bytes> MigrationCommittee::public_keys() const {
    std::vector<Bytes> out;
    for (const auto& m : members_) out.push_back(m.public_key);
    return out;
}

MigrationCommittee::QuorumSignature MigrationCommittee::sign_quorum(BytesView message,
                                                                    std::vector<uint32_t> indices) const {
    if (indices.empty()) {
        for (uint32_t i = 0; i < threshold_; i++) indices.push_back(i);
    }
    std::vector<Signature> sigs;
    for (uint32_t i : indices) {
        if (i >= members_.size()) throw ArgumentError("committee member index out of range");
        sigs.push_back(sign(members_[i], message));
    }
    QuorumSignature out;
    out.aggregate = aggregate(sigs);
    out.signer_indices = std::move(indices);
    return out;
}

bool MigrationCommittee::verify_quorum(BytesView message, const QuorumSignature& sig) const {
    std::set<uint32_t> distinct(sig.signer_indices.begin(), sig.signer_indices.end());
    if (distinct.size() != sig.signer_indices.size()) return false;
    if (distinct.size() < threshold_) return false;
    std::vector<Bytes> pubs;
    for (uint32_t i : sig.signer_indices) {
        if (i >= members_.size()) return false;
        pubs.push_back(members_[i].public_key);
    }
    if (pubs.size() != sig.aggregate.signer_count) return false;
    return verify_aggregate(pubs, message, sig.aggregate);
}

// ---------------------------------------------------------------------------
// Master credentials
// ---------------------------------------------------------------------------

namespace {

json quorum_to_json(const MigrationCommittee::QuorumSignature& q) {
    return json{{"aggregate", to_hex(BytesView(q.aggregate.bytes.data(), q.aggregate.bytes.size()))},
                {"signer_count", q.aggregate.signer_count},
                {"signer_indices", q.signer_indices}};
}

MigrationCommittee::QuorumSignature quorum_from_json(const json& j) {
    MigrationCommittee::QuorumSignature q;
    q.aggregate.bytes = from_hex(j.at("aggregate").get<std::string>());
    q.aggregate.signer_count = j.at("signer_count").get<size_t>();
    q.signer_indices = j.at("signer_indices").get<std::vector<uint32_t>>();
    return q;
}

}  // namespace

json credential_to_json(const MasterCredential& mc) {
    return json{{"did", mc.did.str()},
                {"legacy_id", mc.legacy_id},
                {"attributes", mc.attributes},
                {"issuer", mc.issuer},
                {"timestamp", mc.timestamp},
                {"committee_signature", quorum_to_json(mc.committee_signature)},
                {"sybil_proof", quorum_to_json(mc.sybil_proof)}};
}

MasterCredential credential_from_json(const json& j) {
    MasterCredential mc;
    mc.did = parse_did(j.at("did").get<std::string>());
    mc.legacy_id = j.at("legacy_id").get<std::string>();
    mc.attributes = j.at("attributes").get<std::map<std::string, std::string>>();
    mc.issuer = j.at("issuer").get<std::string>();
    mc.timestamp = j.at("timestamp").get<uint64_t>();
    mc.committee_signature = quorum_from_json(j.at("committee_signature"));
    mc.sybil_proof = quorum_from_json(j.at("sybil_proof"));
    return mc;
}

Bytes credential_signing_bytes(const MasterCredential& mc) {
    Bytes buf;
    append_field(buf, std::string_view("master-credential"));
    append_field(buf, mc.did.str());
    append_field(buf, mc.legacy_id);
    append_u32_be(buf, static_cast<uint32_t>(mc.attributes.size()));
    for (const auto& [k, v] : mc.attributes) {
        append_field(buf, k);
        append_field(buf, v);
    }
    append_field(buf, mc.issuer);
    Bytes ts;
    append_u64_be(ts, mc.timestamp);
    append_field(buf, BytesView(ts.data(), ts.size()));
    return buf;
}

Bytes sybil_statement_bytes(const Did& did, const std::string& legacy_id) {
    Bytes buf;
    append_field(buf, std::string_view("sybil-unique"));
    append_field(buf, did.str());
    append_field(buf, legacy_id);
    return buf;
}

double attribute_similarity(const std::map<std::string, std::string>& a,
                            const std::map<std::string, std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    auto normalize = [](const std::string& s) {
        std::string out;
        for (char c : s) {
            if (std::isspace(static_cast<unsigned char>(c))) continue;
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
        return out;
    };
    std::set<std::string> sa, sb;
    for (const auto& [k, v] : a) sa.insert(normalize(k) + "=" + normalize(v));
    for (const auto& [k, v] : b) sb.insert(normalize(k) + "=" + normalize(v));
    size_t inter = 0;
    for (const auto& x : sa)
        if (sb.contains(x)) inter++;
    size_t uni = sa.size() + sb.size() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

Bytes presentation_signing_bytes(const Presentation& p) {
    Bytes buf;
    append_field(buf, std::string_view("context-presentation"));
    append_field(buf, p.context_did.str());
    append_field(buf, p.master_did.str());
    append_u32_be(buf, static_cast<uint32_t>(p.disclosed.size()));
    for (const auto& [k, v] : p.disclosed) {
        append_field(buf, k);
        append_field(buf, v);
    }
    append_field(buf, p.linkage_commitment.view());
    append_field(buf, BytesView(p.salt.data(), p.salt.size()));
    return buf;
}

// ---------------------------------------------------------------------------
// Migration service
// ---------------------------------------------------------------------------

namespace {

void migration_handler(ContractContext& ctx) {
    json p = json::parse(to_string(BytesView(ctx.payload().data(), ctx.payload().size())));
    std::string op = p.at("op").get<std::string>();

    if (op == "provisional") {
        ctx.put(MigrationService::kContract, "provisional/" + p.at("did").get<std::string>(),
                p.at("mapping").dump());
        ctx.emit("ProvisionalMapping", {{"did", p.at("did").get<std::string>()}});
        return;
    }
    if (op == "anchor_mc") {
        std::string did = p.at("did").get<std::string>();
        if (ctx.get(MigrationService::kContract, "mc/" + did))
            throw DuplicateError("credential already anchored for " + did);
        ctx.put(MigrationService::kContract, "mc/" + did, p.at("record").dump());
        ctx.erase(MigrationService::kContract, "provisional/" + did);
        ctx.emit("CredentialAnchored", {{"did", did}, {"legacy_id", p.at("legacy_id").get<std::string>()}});
        return;
    }
    throw DispatchError("unknown migration op: " + op);
}

}  // namespace

void MigrationService::install(Ledger& ledger) {
    if (!ledger.has_contract(kContract)) ledger.register_contract(kContract, migration_handler);
}

MigrationService::MigrationService(DidRegistry& registry, MigrationCommittee& committee, LegacyOracle& oracle,
                                   LegacyRegistry& legacy, double similarity_threshold)
    : registry_(registry), committee_(committee), oracle_(oracle), legacy_(legacy),
      threshold_(similarity_threshold) {
    install(registry_.ledger());
}

MasterCredential MigrationService::migrate_legacy(const std::string& legacy_id, const KeyPair& agent_key,
                                                  const KeyPair& submitter) {
    // declaration of intent, checked by the oracle before attestation
    Bytes intent;
    append_field(intent, std::string_view("migration-intent"));
    append_field(intent, legacy_id);
    Signature declaration = sign(agent_key, BytesView(intent.data(), intent.size()));
    if (!verify(agent_key.scheme, BytesView(agent_key.public_key.data(), agent_key.public_key.size()),
                BytesView(intent.data(), intent.size()), declaration))
        throw AttestationError("attestation error: intent declaration does not verify");

    uint64_t now = registry_.ledger().current_time().logical_timestamp;
    OracleAttestation att = oracle_.attest(legacy_id, now);
    if (!oracle_.verify_attestation(att))
        throw AttestationError("attestation error: oracle signature invalid");

    // fresh DID following the registration protocol
    Did did = generate_did(BytesView(agent_key.public_key.data(), agent_key.public_key.size()));
    DidDocument doc;
    doc.id = did;
    Bytes pop;
    if (agent_key.scheme == Scheme::Aggregatable) pop = prove_possession(agent_key);
    doc.public_keys.push_back({did.str() + "#key-1", agent_key.scheme, agent_key.public_key, pop});
    doc.capabilities = json::object();
    for (const auto& [k, v] : att.attributes) doc.capabilities[k] = v;
    bool submitter_holds_key =
        submitter.scheme == Scheme::Standard && submitter.public_key == agent_key.public_key;
    if (!submitter_holds_key) {
        DocumentProof proof;
        proof.type = agent_key.scheme == Scheme::Standard ? "Ed25519Signature2020" : "Bls12381Signature2020";
        proof.verification_method = doc.public_keys[0].id;
        doc.proof = proof;
        Bytes msg = document_proof_bytes(doc);
        doc.proof->value = sign(agent_key, BytesView(msg.data(), msg.size())).bytes;
    }
    registry_.register_did(doc, submitter);

    json mapping{{"legacy_id", legacy_id}, {"attested_at", att.timestamp}};
    json prov{{"op", "provisional"}, {"did", did.str()}, {"mapping", mapping}};
    Receipt r1 = registry_.ledger().submit(kContract, to_bytes(prov.dump()), submitter, did.str());
    if (!r1.ok) rethrow_receipt(r1);

    // Sybil resistance: no anchored credential may be near-identical
    for (const auto& existing : anchored_credentials()) {
        double sim = attribute_similarity(existing.attributes, att.attributes);
        if (sim >= threshold_)
            throw SybilError("sybil error: attribute similarity " + std::to_string(sim) +
                             " with existing credential for " + existing.did.str());
    }

    MasterCredential mc;
    mc.did = did;
    mc.legacy_id = legacy_id;
    mc.attributes = att.attributes;
    mc.issuer = "migration-committee";
    mc.timestamp = registry_.ledger().current_time().logical_timestamp;
    Bytes body = credential_signing_bytes(mc);
    mc.committee_signature = committee_.sign_quorum(BytesView(body.data(), body.size()));
    Bytes sybil = sybil_statement_bytes(did, legacy_id);
    mc.sybil_proof = committee_.sign_quorum(BytesView(sybil.data(), sybil.size()));

    Bytes canonical = to_bytes(credential_to_json(mc).dump());
    ContentId cid = registry_.cas().put(canonical);
    json anchor{{"op", "anchor_mc"},
                {"did", did.str()},
                {"legacy_id", legacy_id},
                {"record", {{"mc_cid", cid.hex()}, {"legacy_id", legacy_id}}}};
    Receipt r2 = registry_.ledger().submit(kContract, to_bytes(anchor.dump()), submitter, did.str());
    if (!r2.ok) rethrow_receipt(r2);

    return mc;
}

bool MigrationService::verify_credential(const MasterCredential& mc) const {
    Bytes body = credential_signing_bytes(mc);
    if (!committee_.verify_quorum(BytesView(body.data(), body.size()), mc.committee_signature)) return false;
    Bytes sybil = sybil_statement_bytes(mc.did, mc.legacy_id);
    return committee_.verify_quorum(BytesView(sybil.data(), sybil.size()), mc.sybil_proof);
}

Presentation MigrationService::derive_context_did(const MasterCredential& mc,
                                                  const std::vector<std::string>& disclosed_fields,
                                                  const KeyPair& agent_key, uint64_t salt_seed) const {
    Presentation p;
    for (const auto& f : disclosed_fields) {
        auto it = mc.attributes.find(f);
        if (it == mc.attributes.end())
            throw DisclosureError("disclosure error: credential has no attribute " + f);
        p.disclosed[f] = it->second;
    }
    Bytes salt_material;
    append_field(salt_material, std::string_view("presentation-salt"));
    append_u64_be(salt_material, salt_seed);
    Digest salt_digest = sha256(salt_material);
    p.salt.assign(salt_digest.bytes.begin(), salt_digest.bytes.end());

    // ephemeral context identity derived from the salt
    Bytes ctx_seed;
    append_field(ctx_seed, std::string_view("context-did"));
    append_field(ctx_seed, BytesView(p.salt.data(), p.salt.size()));
    append_field(ctx_seed, mc.did.str());
    p.context_did = generate_did(sha256(ctx_seed).view());
    p.master_did = mc.did;

    Bytes canonical = to_bytes(credential_to_json(mc).dump());
    Bytes commit_input;
    append_field(commit_input, BytesView(p.salt.data(), p.salt.size()));
    append_field(commit_input, BytesView(canonical.data(), canonical.size()));
    p.linkage_commitment = sha256(commit_input);

    Bytes msg = presentation_signing_bytes(p);
    p.agent_signature = sign(agent_key, BytesView(msg.data(), msg.size()));
    return p;
}

bool MigrationService::verify_presentation(const Presentation& p, std::string* why) const {
    auto raw = registry_.ledger().state_get(kContract, "mc/" + p.master_did.str());
    if (!raw) {
        if (why) *why = "no anchored credential for the master did";
        return false;
    }
    json rec = json::parse(*raw);
    Bytes canonical;
    try {
        canonical = registry_.cas().get(ContentId{Digest::from_hex_str(rec.at("mc_cid").get<std::string>())});
    } catch (const NotFoundError&) {
        if (why) *why = "anchored credential bytes missing";
        return false;
    }
    Bytes commit_input;
    append_field(commit_input, BytesView(p.salt.data(), p.salt.size()));
    append_field(commit_input, BytesView(canonical.data(), canonical.size()));
    if (sha256(commit_input) != p.linkage_commitment) {
        if (why) *why = "linkage commitment does not open";
        return false;
    }

    MasterCredential mc = credential_from_json(json::parse(to_string(BytesView(canonical.data(), canonical.size()))));
    for (const auto& [k, v] : p.disclosed) {
        auto it = mc.attributes.find(k);
        if (it == mc.attributes.end() || it->second != v) {
            if (why) *why = "disclosed field does not match the credential";
            return false;
        }
    }

    DidDocument doc;
    try {
        doc = registry_.fetch_document(p.master_did);
    } catch (const std::exception&) {
        if (why) *why = "master did does not resolve";
        return false;
    }
    Bytes msg = presentation_signing_bytes(p);
    for (const auto& key : doc.public_keys) {
        try {
            if (key.scheme == p.agent_signature.scheme &&
                verify(key.scheme, BytesView(key.public_key.data(), key.public_key.size()),
                       BytesView(msg.data(), msg.size()), p.agent_signature))
                return true;
        } catch (const SchemeError&) {
        }
    }
    if (why) *why = "agent signature does not verify under the master keys";
    return false;
}

LegacyStatus MigrationService::decommission_legacy(const std::string& legacy_id, LegacyStatusKind kind,
                                                   std::optional<Did> redirect) {
    return legacy_.decommission(legacy_id, kind, redirect);
}

std::vector<MasterCredential> MigrationService::anchored_credentials() const {
    std::vector<MasterCredential> out;
    for (const auto& [key, value] : registry_.ledger().state_entries(kContract)) {
        if (key.rfind("mc/", 0) != 0) continue;
        json rec = json::parse(value);
        Bytes canonical = registry_.cas().get(ContentId{Digest::from_hex_str(rec.at("mc_cid").get<std::string>())});
        out.push_back(credential_from_json(json::parse(to_string(BytesView(canonical.data(), canonical.size())))));
    }
    return out;
}

}  // namespace blocka2a
