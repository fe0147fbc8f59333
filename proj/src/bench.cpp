#include "blocka2a/bench.hpp"

#include <chrono>
#include <functional>
#include <sstream>

#include "blocka2a/errors.hpp"

namespace blocka2a {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct BenchWorld {
    Ledger ledger;
    Cas cas;
    DidRegistry registry{ledger, cas};
    KeyPair admin = generate_keypair(Scheme::Standard, sha256_str("bench-admin").view());
    AgcGovernance agc{registry, admin};
    AccessControl acc{registry, generate_keypair(Scheme::Standard, sha256_str("bench-acc").view()), 300};
    WorkflowContracts ilc{registry};
    ProvenanceLedger provenance{registry};
    DefenseEngine doe{registry, agc, acc, ilc, provenance, admin, 0.95};

    struct BenchAgent {
        KeyPair msg_keys;
        KeyPair agg_keys;
        DidDocument doc;
        Did did() const { return doc.id; }
    };

    BenchAgent make_agent(const std::string& tag, bool permissions_role = true) {
        BenchAgent a;
        a.msg_keys = generate_keypair(Scheme::Standard, sha256_str("bench-msg-" + tag).view());
        a.agg_keys = generate_keypair(Scheme::Aggregatable, sha256_str("bench-agg-" + tag).view());
        Did did = generate_did(BytesView(a.msg_keys.public_key.data(), a.msg_keys.public_key.size()));
        a.doc.id = did;
        a.doc.public_keys.push_back({did.str() + "#key-1", Scheme::Standard, a.msg_keys.public_key, {}});
        a.doc.public_keys.push_back({did.str() + "#key-2", Scheme::Aggregatable, a.agg_keys.public_key,
                                     prove_possession(a.agg_keys)});
        if (permissions_role) {
            a.doc.capabilities = json{{"role", "engineer"},
                                      {"permissions", json::array({"read", "write", "invoke", "modify"})}};
        }
        return a;
    }

    BenchAgent enroll(const std::string& tag) {
        BenchAgent a = make_agent(tag);
        registry.register_did(a.doc, a.msg_keys);
        return a;
    }
};

struct Sample {
    std::string category;
    std::string operation;
    std::string op_type;
    std::vector<double> values;
};

void add(std::vector<Sample>& samples, const std::string& cat, const std::string& op,
         const std::string& type, double value) {
    for (auto& s : samples) {
        if (s.category == cat && s.operation == op) {
            s.values.push_back(value);
            return;
        }
    }
    samples.push_back({cat, op, type, {value}});
}

BenchReport finalize(std::string suite, const std::vector<Sample>& samples, size_t runs) {
    BenchReport report;
    report.suite = std::move(suite);
    report.runs_per_row = runs;
    report.hardware_note = "single desk-class CPU, wall-clock means; absolute numbers are hardware-dependent";
    for (const auto& s : samples) {
        double sum = 0;
        for (double v : s.values) sum += v;
        report.rows.push_back({s.category, s.operation, sum / static_cast<double>(s.values.size()),
                               s.op_type, s.values.size()});
    }
    return report;
}

BenchReport bench_core_ops(size_t runs) {
    std::vector<Sample> samples;

    for (size_t run = 0; run < runs; run++) {
        BenchWorld w;
        std::string tag = std::to_string(run);

        // --- DID registration ---
        auto agent = w.make_agent("reg-" + tag);
        auto t0 = Clock::now();
        Bytes canon = canonical_document_bytes(agent.doc);
        w.cas.put(canon);
        add(samples, "DID Registration", "Off-chain document storage", "Off chain", ms_since(t0));

        t0 = Clock::now();
        w.registry.register_did(agent.doc, agent.msg_keys);
        add(samples, "DID Registration", "On-chain hash anchoring", "On chain", ms_since(t0));

        // --- Message authentication ---
        Bytes payload = to_bytes("bench message payload " + tag);
        t0 = Clock::now();
        auto msg = w.registry.sign_message(agent.did(), agent.msg_keys, BytesView(payload.data(), payload.size()));
        add(samples, "Message Authentication", "Signature generation", "Off chain", ms_since(t0));

        t0 = Clock::now();
        w.registry.fetch_document(agent.did());
        add(samples, "Message Authentication", "DID document retrieval", "Off chain", ms_since(t0));

        t0 = Clock::now();
        auto decision = w.registry.verify_message(msg, "write");
        add(samples, "Message Authentication", "Signature verification", "Off chain", ms_since(t0));
        if (!decision.accepted) throw std::logic_error("bench verification failed");

        // --- Task recording ---
        std::vector<BenchWorld::BenchAgent> participants;
        for (int i = 0; i < 3; i++) participants.push_back(w.enroll("task-" + tag + "-" + std::to_string(i)));
        TaskMetadata meta;
        meta.initiator = participants[0].did();
        for (const auto& p : participants) meta.participants.push_back(p.did());
        meta.description = "bench task " + tag;
        meta.deadline = w.ledger.current_time().logical_timestamp + 100;

        t0 = Clock::now();
        auto task = w.provenance.initiate_task(meta, participants[0].msg_keys);
        add(samples, "Task Recording", "Task initialization", "On chain", ms_since(t0));

        t0 = Clock::now();
        Bytes mmsg = milestone_signing_bytes(task.task_hash, "delivery");
        std::vector<std::pair<Did, Signature>> sigs;
        std::vector<Signature> raw;
        for (const auto& p : participants) {
            raw.push_back(sign(p.agg_keys, BytesView(mmsg.data(), mmsg.size())));
            sigs.emplace_back(p.did(), raw.back());
        }
        aggregate(raw);
        add(samples, "Task Recording", "Multi-signature & public key aggregation", "On&Off chain",
            ms_since(t0));

        t0 = Clock::now();
        w.provenance.transition_state(task.task_hash, "delivery", sigs, participants[0].msg_keys);
        add(samples, "Task Recording", "State transition", "On chain", ms_since(t0));

        Bytes blob = to_bytes("bench payload blob " + tag);
        t0 = Clock::now();
        w.provenance.anchor_data(BytesView(blob.data(), blob.size()), participants[0].msg_keys);
        add(samples, "Task Recording", "Data anchoring", "On chain", ms_since(t0));

        // --- Access control ---
        AccessPolicy policy;
        policy.resource = "res://bench";
        policy.action = Action::Read;
        policy.did_clauses.push_back({"capabilities.role", Comparator::Eq, "engineer"});
        w.acc.deploy_policy(policy, w.admin);

        t0 = Clock::now();
        auto outcome = w.acc.authorize(agent.did(), Action::Read, "res://bench", {}, agent.msg_keys);
        add(samples, "Access Control", "ACC token issuance", "On chain", ms_since(t0));
        if (!outcome.granted) throw std::logic_error("bench authorization failed");

        t0 = Clock::now();
        bool ok = w.acc.verify_token(*outcome.token, w.ledger.current_time(), {});
        add(samples, "Access Control", "Off-chain token verification", "Off chain", ms_since(t0));
        if (!ok) throw std::logic_error("bench token verification failed");
    }
    return finalize("core_ops", samples, runs);
}

BenchReport bench_doe_algorithms(size_t runs) {
    std::vector<Sample> samples;

    for (size_t run = 0; run < runs; run++) {
        BenchWorld w;
        std::string tag = std::to_string(run);

        auto suspect = w.enroll("suspect-" + tag);
        auto peer = w.enroll("peer-" + tag);
        w.agc.register_agent(suspect.did(), w.registry.resolve(suspect.did()).doc_hash,
                             {{suspect.did(), suspect.msg_keys.public_key}}, 1, suspect.msg_keys);
        w.doe.ensure_reputation(suspect.did());
        for (int i = 0; i < 4; i++) w.doe.update_reputation(suspect.did(), Outcome::Failure);

        TaskMetadata meta{suspect.did(), {suspect.did(), peer.did()}, "doe bench task " + tag,
                          w.ledger.current_time().logical_timestamp + 100};
        auto task = w.provenance.initiate_task(meta, suspect.msg_keys);

        WorkflowMachine m;
        m.states = {"running", "done"};
        m.initial = "running";
        m.transitions = {{"running", "finish", "done"}};
        GuardSpec g;
        g.quorum_k = 1;
        m.guards["running"] = g;
        w.ilc.deploy(m, {suspect.did(), peer.did()}, suspect.msg_keys, task.task_hash);

        // --- Algorithm 1: byzantine flagging ---
        auto t0 = Clock::now();
        json evidence = evidence_to_json([&] {
            EvidenceBundle b;
            b.subject = suspect.did();
            b.assembled_at = w.ledger.current_time();
            for (const auto& ev : w.ledger.query_events({})) {
                for (const auto& [k, v] : ev.attributes) {
                    if (v == suspect.did().str()) {
                        b.on_chain_refs.push_back(std::to_string(ev.time.block_height) + ":" + ev.kind);
                        break;
                    }
                }
            }
            return b;
        }());
        ContentId evidence_cid = w.cas.put(to_bytes(evidence.dump()));
        double evidence_ms = ms_since(t0);
        add(samples, "Byzantine Agent Flagging", "Evidence collection", "Off chain", evidence_ms);

        t0 = Clock::now();
        json annotate{{"op", "annotate"}, {"did", suspect.did().str()}, {"note", "suspicious"}};
        Receipt r1 = w.ledger.submit(AgcGovernance::kContract, to_bytes(annotate.dump()), w.admin, "doe");
        double agc_ms = ms_since(t0);
        if (!r1.ok) throw std::logic_error("bench annotate failed");
        add(samples, "Byzantine Agent Flagging", "AGC status update", "On chain", agc_ms);

        t0 = Clock::now();
        json alert{{"op", "alert"}, {"kind", "ByzantineFlag"}, {"subject", suspect.did().str()},
                   {"reason", "low reputation"}, {"confidence", 0.9}, {"evidence_cid", evidence_cid.hex()}};
        Receipt r2 = w.ledger.submit(DefenseEngine::kContract, to_bytes(alert.dump()), w.admin, "doe");
        double alert_ms = ms_since(t0);
        if (!r2.ok) throw std::logic_error("bench alert failed");
        add(samples, "Byzantine Agent Flagging", "On-chain alert generation", "On chain", alert_ms);
        add(samples, "Byzantine Agent Flagging", "Total", "", evidence_ms + agc_ms + alert_ms);

        // --- Algorithm 2: execution halt upon tampering ---
        Bytes prompt = to_bytes("bench prompt " + tag);
        Digest anchor = sha256(prompt);
        Bytes tampered = prompt;
        tampered[0] ^= 1;

        t0 = Clock::now();
        json tamper_evidence{{"sender", suspect.did().str()},
                             {"expected", anchor.hex()},
                             {"received", to_hex(BytesView(tampered.data(), tampered.size()))}};
        ContentId tamper_cid = w.cas.put(to_bytes(tamper_evidence.dump()));
        double store_ms = ms_since(t0);
        add(samples, "Execution Halt Upon Tampering", "Tamper evidence storage", "Off chain", store_ms);

        t0 = Clock::now();
        json halt{{"op", "halt_task"}, {"task_hash", task.task_hash.hex()}};
        Receipt r3 = w.ledger.submit(DefenseEngine::kContract, to_bytes(halt.dump()), w.admin, "doe");
        double guard_ms = ms_since(t0);
        if (!r3.ok) throw std::logic_error("bench halt failed");
        add(samples, "Execution Halt Upon Tampering", "ILC guard update", "On chain", guard_ms);

        t0 = Clock::now();
        json alert2{{"op", "alert"}, {"kind", "Tampering"}, {"subject", suspect.did().str()},
                    {"reason", "hash mismatch"}, {"confidence", 1.0}, {"evidence_cid", tamper_cid.hex()}};
        Receipt r4 = w.ledger.submit(DefenseEngine::kContract, to_bytes(alert2.dump()), w.admin, "doe");
        double alert2_ms = ms_since(t0);
        if (!r4.ok) throw std::logic_error("bench tamper alert failed");
        add(samples, "Execution Halt Upon Tampering", "On-chain alert generation", "On chain", alert2_ms);
        add(samples, "Execution Halt Upon Tampering", "Total", "", store_ms + guard_ms + alert2_ms);

        // --- Algorithm 3: real-time permission revocation ---
        AccessPolicy policy;
        policy.resource = "res://bench-revoke";
        policy.action = Action::Read;
        policy.did_clauses.push_back({"capabilities.role", Comparator::Eq, "engineer"});
        w.acc.deploy_policy(policy, w.admin);
        auto granted = w.acc.authorize(suspect.did(), Action::Read, "res://bench-revoke", {}, suspect.msg_keys);
        if (!granted.granted) throw std::logic_error("bench revoke precondition failed");

        t0 = Clock::now();
        auto bindings = w.agc.capability_bindings(suspect.did());
        double resolve_ms = ms_since(t0);
        add(samples, "Real-time Permission Revocation", "AGC capability resolution", "On chain", resolve_ms);

        t0 = Clock::now();
        json blist = json::array();
        for (const auto& [res, act] : bindings) blist.push_back({{"resource", res}, {"action", act}});
        json revoke{{"op", "revoke_bindings"}, {"did", suspect.did().str()}, {"bindings", blist},
                    {"deny_all", true}};
        Receipt r5 = w.ledger.submit(DefenseEngine::kContract, to_bytes(revoke.dump()), w.admin, "doe");
        double policy_ms = ms_since(t0);
        if (!r5.ok) throw std::logic_error("bench revoke failed");
        add(samples, "Real-time Permission Revocation", "ACC policy update", "On chain", policy_ms);

        t0 = Clock::now();
        json alert3{{"op", "alert"}, {"kind", "Revocation"}, {"subject", suspect.did().str()},
                    {"reason", "bindings revoked"}, {"confidence", 1.0}};
        Receipt r6 = w.ledger.submit(DefenseEngine::kContract, to_bytes(alert3.dump()), w.admin, "doe");
        double log_ms = ms_since(t0);
        if (!r6.ok) throw std::logic_error("bench revocation log failed");
        add(samples, "Real-time Permission Revocation", "On-chain revocation log", "On chain", log_ms);
        add(samples, "Real-time Permission Revocation", "Total", "", resolve_ms + policy_ms + log_ms);
    }
    return finalize("doe_algorithms", samples, runs);
}

}  // namespace

BenchReport run_bench(BenchSuite suite, size_t runs) {
    if (runs < 10) runs = 10;  // every row averages at least 10 runs
    return suite == BenchSuite::CoreOps ? bench_core_ops(runs) : bench_doe_algorithms(runs);
}

std::string render_bench_table(const BenchReport& report) {
    std::ostringstream out;
    out << "Suite: " << report.suite << " (mean over " << report.runs_per_row << " runs)\n";
    out << report.hardware_note << "\n\n";
    size_t cat_w = 8, op_w = 9;
    for (const auto& r : report.rows) {
        cat_w = std::max(cat_w, r.category.size());
        op_w = std::max(op_w, r.operation.size());
    }
    auto pad = [](const std::string& s, size_t w) {
        return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
    };
    out << pad("Category", cat_w) << "  " << pad("Operation", op_w) << "  " << pad("Duration (ms)", 14)
        << "Operation Type\n";
    out << std::string(cat_w + op_w + 34, '-') << "\n";
    std::string last_cat;
    for (const auto& r : report.rows) {
        char buf[32];
        snprintf(buf, sizeof(buf), "%.2f", r.mean_ms);
        std::string shown_cat = (r.category == last_cat) ? "" : r.category;
        last_cat = r.category;
        out << pad(shown_cat, cat_w) << "  " << pad(r.operation, op_w) << "  " << pad(buf, 14) << r.op_type
            << "\n";
    }
    return out.str();
}

json bench_report_to_json(const BenchReport& report) {
    json rows = json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"category", r.category},
                        {"operation", r.operation},
                        {"mean_ms", r.mean_ms},
                        {"op_type", r.op_type},
                        {"runs", r.runs}});
    }
    return json{{"suite", report.suite},
                {"runs_per_row", report.runs_per_row},
                {"hardware_note", report.hardware_note},
                {"rows", rows}};
}

}  // namespace blocka2a
