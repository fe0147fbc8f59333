#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "blocka2a/errors.hpp"
#include "fixtures.hpp"

using namespace blocka2a;
using namespace blocka2a::testing;
using nlohmann::json;

namespace {

// Independent reference implementation of the decay-then-increment
// recurrence, kept apart from the engine's code path.
struct RepOracle {
    double alpha = 1.0, beta = 1.0;
    uint64_t last = 0;
    double lambda;

    explicit RepOracle(double l, uint64_t created_at) : last(created_at), lambda(l) {}
    void apply(bool success, uint64_t now) {
        double d = std::pow(lambda, static_cast<double>(now - last));
        alpha *= d;
        beta *= d;
        (success ? alpha : beta) += 1.0;
        last = now;
    }
    double score() const { return alpha / (alpha + beta); }
};

}  // namespace

TEST_CASE("first success moves the uniform prior to score 2/3") {
    World w;
    auto a = w.enroll(700, "rep-a");
    w.doe.ensure_reputation(a.did());
    auto score = w.doe.update_reputation(a.did(), Outcome::Success);
    // ensure and update land in consecutive blocks; decay over one tick first
    RepOracle oracle(w.doe.decay_lambda(), score.last_update.logical_timestamp - 1);
    oracle.apply(true, score.last_update.logical_timestamp);
    CHECK(score.score() == doctest::Approx(oracle.score()));

    // with no elapsed time the arithmetic is exactly (1+1)/(1+1+1)
    World w2;
    auto b = w2.enroll(701, "rep-b");
    auto s2 = w2.doe.update_reputation(b.did(), Outcome::Success);  // creates prior at the same tick
    CHECK(s2.score() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("decayed failure matches the independent recurrence oracle") {
    World w;
    auto a = w.enroll(702, "rep-c");
    auto created = w.doe.ensure_reputation(a.did());
    RepOracle oracle(0.95, created.last_update.logical_timestamp);

    w.ledger.tick(9);  // the failure lands 10 ticks after creation
    auto score = w.doe.update_reputation(a.did(), Outcome::Failure);
    REQUIRE(score.last_update.logical_timestamp == created.last_update.logical_timestamp + 10);
    oracle.apply(false, score.last_update.logical_timestamp);
    CHECK(score.alpha == doctest::Approx(oracle.alpha));
    CHECK(score.beta == doctest::Approx(oracle.beta));
    CHECK(score.score() == doctest::Approx(oracle.score()));
}

TEST_CASE("long alternating runs stay inside (0,1) and match the oracle") {
    World w;
    auto a = w.enroll(703, "rep-d");
    auto created = w.doe.ensure_reputation(a.did());
    RepOracle oracle(0.95, created.last_update.logical_timestamp);

    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 2000; i++) {
        bool success = (i % 2) == 0;
        auto score = w.doe.update_reputation(a.did(), success ? Outcome::Success : Outcome::Failure);
        oracle.apply(success, score.last_update.logical_timestamp);
        CHECK(score.score() == doctest::Approx(oracle.score()).epsilon(1e-9));
        lo = std::min(lo, score.score());
        hi = std::max(hi, score.score());
        CHECK(score.score() > 0.0);
        CHECK(score.score() < 1.0);
        // evidence mass bound in the per-tick regime: 2 + 1/(1 - lambda)
        CHECK(score.alpha + score.beta <= 2.0 + 1.0 / (1.0 - 0.95) + 1e-9);
    }
    CHECK(lo > 0.05);
    CHECK(hi < 0.95);
}

TEST_CASE("reputation writes are restricted to the engine identity") {
    World w;
    auto a = w.enroll(704, "rep-e");
    auto outsider = generate_keypair(Scheme::Standard, seed_of(9999));
    json payload{{"op", "update"}, {"did", a.did().str()}, {"outcome", "success"}};
    Receipt r = w.ledger.submit(DefenseEngine::kReputationContract, to_bytes(payload.dump()), outsider, "outsider");
    CHECK_FALSE(r.ok);
    CHECK(r.error.find("auth error") != std::string::npos);
    CHECK_THROWS_AS(w.doe.update_reputation(Did{"ghost"}, Outcome::Success), NotFoundError);
}

TEST_CASE("flagging equals the brute-force below-threshold set on 50 agents") {
    World w;
    std::mt19937_64 rng(77);
    std::vector<TestAgent> agents;
    for (uint64_t i = 0; i < 50; i++) {
        agents.push_back(w.enroll(800 + i, "swarm-" + std::to_string(i)));
        w.doe.ensure_reputation(agents.back().did());
    }
    for (const auto& a : agents) {
        int updates = 1 + static_cast<int>(rng() % 6);
        for (int u = 0; u < updates; u++) {
            w.doe.update_reputation(a.did(), (rng() % 2) ? Outcome::Success : Outcome::Failure);
        }
    }

    double tau = 0.5;
    std::set<std::string> expected;
    for (const auto& rep : w.doe.all_reputations()) {
        if (rep.score() < tau) expected.insert(rep.did.str());
    }
    auto alerts = w.doe.flag_byzantine(tau);
    std::set<std::string> flagged;
    for (const auto& alert : alerts) {
        flagged.insert(alert.subject.str());
        CHECK(alert.kind == AlertKind::ByzantineFlag);
        REQUIRE(alert.evidence_cid.has_value());
        CHECK(w.cas.contains(*alert.evidence_cid));
    }
    CHECK(flagged == expected);

    // every alert is anchored on chain with a matching subject and reason hash
    auto events = w.ledger.query_events({.kind = "DefenseAlert"});
    REQUIRE(events.size() == alerts.size());
    for (const auto& alert : alerts) {
        bool anchored = false;
        for (const auto& ev : events) {
            if (ev.attributes.at("subject") == alert.subject.str() &&
                ev.attributes.at("reason_hash") == sha256_str(alert.reason).hex())
                anchored = true;
        }
        CHECK(anchored);
    }
}

TEST_CASE("no alerts when every score clears the threshold") {
    World w;
    for (uint64_t i = 0; i < 5; i++) {
        auto a = w.enroll(860 + i, "good-" + std::to_string(i));
        w.doe.ensure_reputation(a.did());
        w.doe.update_reputation(a.did(), Outcome::Success);
    }
    CHECK(w.doe.flag_byzantine(0.5).empty());
    CHECK(w.ledger.query_events({.kind = "DefenseAlert"}).empty());
}

TEST_CASE("flagging annotates the governance record") {
    World w;
    auto a = w.enroll(870, "annotated");
    w.agc.register_agent(a.did(), w.registry.resolve(a.did()).doc_hash, {{a.did(), a.msg_key.public_key}}, 1,
                         a.msg_key);
    w.doe.ensure_reputation(a.did());
    for (int i = 0; i < 5; i++) w.doe.update_reputation(a.did(), Outcome::Failure);
    auto alerts = w.doe.flag_byzantine(0.5);
    REQUIRE(alerts.size() == 1);
    CHECK(w.agc.record(a.did()).annotation == "suspicious");
}

TEST_CASE("halt on tamper: clean payloads pass, any mutation halts the workflow") {
    World w;
    auto a = w.enroll(880, "halt-a");
    auto b = w.enroll(881, "halt-b");
    TaskMetadata meta{a.did(), {a.did(), b.did()}, "guarded task", w.ledger.current_time().logical_timestamp + 50};
    auto task = w.provenance.initiate_task(meta, a.msg_key);

    WorkflowMachine m;
    m.states = {"running", "done"};
    m.initial = "running";
    m.transitions = {{"running", "finish", "done"}};
    GuardSpec g;
    g.quorum_k = 1;
    m.guards["running"] = g;
    auto wf = w.ilc.deploy(m, {a.did(), b.did()}, a.msg_key, task.task_hash);

    Bytes prompt = to_bytes("total the Q3 figures");
    Digest anchor = sha256(prompt);

    auto clean = w.doe.halt_on_tamper(BytesView(prompt.data(), prompt.size()), b.did(), anchor, task.task_hash);
    CHECK_FALSE(clean.halted);

    // workflow still advances after a clean check
    auto e = w.ilc_endorsement(a, wf, "running", "finish");
    CHECK(w.ilc.submit_event(wf, "finish", json::object(), {e}, a.msg_key) == "done");

    // re-deploy a fresh workflow, then a one-character mutation halts it
    auto wf2 = w.ilc.deploy(m, {a.did(), b.did()}, a.msg_key, task.task_hash);
    Bytes tampered = prompt;
    tampered[0] = 'T';
    auto decision = w.doe.halt_on_tamper(BytesView(tampered.data(), tampered.size()), b.did(), anchor,
                                         task.task_hash);
    CHECK(decision.halted);
    REQUIRE(decision.alert.has_value());
    CHECK(decision.alert->kind == AlertKind::Tampering);
    CHECK(w.cas.contains(*decision.alert->evidence_cid));

    auto e2 = w.ilc_endorsement(a, wf2, "running", "finish");
    CHECK_THROWS_AS(w.ilc.submit_event(wf2, "finish", json::object(), {e2}, a.msg_key), HaltError);

    // administrative un-halt restores execution
    w.doe.unhalt_task(task.task_hash);
    CHECK(w.ilc.submit_event(wf2, "finish", json::object(), {e2}, a.msg_key) == "done");

    CHECK_THROWS_AS(w.doe.halt_on_tamper(BytesView(prompt.data(), prompt.size()), b.did(),
                                         anchor, sha256_str("unknown")),
                    NotFoundError);
}

TEST_CASE("mutation sweep: 100 of 100 mutations halt, zero false halts") {
    World w;
    auto a = w.enroll(890, "sweep-a");
    TaskMetadata meta{a.did(), {a.did()}, "sweep task", w.ledger.current_time().logical_timestamp + 500};
    auto task = w.provenance.initiate_task(meta, a.msg_key);

    Bytes prompt = to_bytes("the quick brown fox jumps over the lazy dog");
    Digest anchor = sha256(prompt);
    std::mt19937_64 rng(4242);

    for (int i = 0; i < 100; i++) {
        CHECK_FALSE(w.doe.halt_on_tamper(BytesView(prompt.data(), prompt.size()), a.did(), anchor,
                                         task.task_hash)
                        .halted);
        Bytes mutated = prompt;
        size_t pos = rng() % mutated.size();
        uint8_t delta = static_cast<uint8_t>(1 + rng() % 255);
        mutated[pos] ^= delta;
        CHECK(w.doe.halt_on_tamper(BytesView(mutated.data(), mutated.size()), a.did(), anchor, task.task_hash)
                  .halted);
    }
}

TEST_CASE("anomaly detection flags synthetic bursts with high confidence") {
    World w;
    auto talker = w.enroll(900, "talker");
    auto flooder = w.enroll(901, "flooder");
    auto peer = w.enroll(902, "peer");

    // baseline window: one message per 50-tick bucket from each agent
    const uint64_t bucket = 50;
    uint64_t base_start = w.ledger.current_time().logical_timestamp + 1;
    for (int round = 0; round < 5; round++) {
        w.provenance.record_message(talker.did(), peer.did(), sha256_str("t" + std::to_string(round)),
                                    talker.msg_key);
        w.provenance.record_message(flooder.did(), peer.did(), sha256_str("f" + std::to_string(round)),
                                    flooder.msg_key);
        w.ledger.tick(bucket - 2);
    }
    uint64_t base_end = w.ledger.current_time().logical_timestamp;
    auto baselines = w.doe.build_baselines(base_start, base_end, bucket);
    REQUIRE(baselines.size() == 2);

    // attack window: the flooder emits 50x its baseline bucket rate
    uint64_t attack_start = w.ledger.current_time().logical_timestamp + 1;
    for (int i = 0; i < 50; i++) {
        w.provenance.record_message(flooder.did(), peer.did(), sha256_str("flood" + std::to_string(i)),
                                    flooder.msg_key);
    }
    w.provenance.record_message(talker.did(), peer.did(), sha256_str("calm"), talker.msg_key);
    uint64_t attack_end = w.ledger.current_time().logical_timestamp;

    auto findings = w.doe.detect_anomaly(attack_start, attack_end, baselines, 3.0, bucket);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].did == flooder.did());
    CHECK(findings[0].kind == AnomalyKind::RateBurst);
    CHECK(findings[0].confidence >= 0.9);
}

TEST_CASE("windows matching the baseline produce no findings") {
    World w;
    auto a = w.enroll(910, "steady");
    auto b = w.enroll(911, "peer2");
    uint64_t start = w.ledger.current_time().logical_timestamp + 1;
    for (int i = 0; i < 8; i++) {
        w.provenance.record_message(a.did(), b.did(), sha256_str("s" + std::to_string(i)), a.msg_key);
        w.ledger.tick(4);
    }
    uint64_t mid = w.ledger.current_time().logical_timestamp;
    auto baselines = w.doe.build_baselines(start, mid);
    uint64_t start2 = mid + 1;
    for (int i = 0; i < 8; i++) {
        w.provenance.record_message(a.did(), b.did(), sha256_str("s2" + std::to_string(i)), a.msg_key);
        w.ledger.tick(4);
    }
    CHECK(w.doe.detect_anomaly(start2, w.ledger.current_time().logical_timestamp, baselines).empty());
}

TEST_CASE("novel transition patterns are flagged") {
    World w;
    auto a = w.enroll(920, "pattern");
    WorkflowMachine m;
    m.states = {"s0", "s1", "s2"};
    m.initial = "s0";
    m.transitions = {{"s0", "step", "s1"}, {"s1", "detour", "s2"}, {"s0", "detour", "s2"}};
    GuardSpec g;
    g.quorum_k = 1;
    m.guards["s0"] = g;
    m.guards["s1"] = g;

    // baseline: one normal "step" transition
    auto wf1 = w.ilc.deploy(m, {a.did()}, a.msg_key);
    uint64_t base_start = 0;
    auto e1 = w.ilc_endorsement(a, wf1, "s0", "step");
    json fire{{"op", "fire"}, {"instance", wf1}, {"event", "step"}, {"payload", json::object()},
              {"signatures", json::array({{{"did", a.did().str()},
                                           {"sig", to_hex(BytesView(e1.signature.bytes.data(), e1.signature.bytes.size()))}}})}};
    // route through a transaction whose submitter attribute carries the agent
    Receipt r = w.ledger.submit(WorkflowContracts::kContract, to_bytes(fire.dump()), a.msg_key, a.did().str());
    REQUIRE(r.ok);
    uint64_t base_end = w.ledger.current_time().logical_timestamp;
    auto baselines = w.doe.build_baselines(base_start, base_end);

    // attack window: a transition pattern never seen in baseline
    uint64_t attack_start = w.ledger.current_time().logical_timestamp + 1;
    auto wf2 = w.ilc.deploy(m, {a.did()}, a.msg_key);
    auto e2 = w.ilc_endorsement(a, wf2, "s0", "detour");
    json fire2{{"op", "fire"}, {"instance", wf2}, {"event", "detour"}, {"payload", json::object()},
               {"signatures", json::array({{{"did", a.did().str()},
                                            {"sig", to_hex(BytesView(e2.signature.bytes.data(), e2.signature.bytes.size()))}}})}};
    Receipt r2 = w.ledger.submit(WorkflowContracts::kContract, to_bytes(fire2.dump()), a.msg_key, a.did().str());
    REQUIRE(r2.ok);

    auto findings = w.doe.detect_anomaly(attack_start, w.ledger.current_time().logical_timestamp, baselines);
    bool novel_flagged = false;
    for (const auto& f : findings) {
        if (f.did == a.did() && f.kind == AnomalyKind::NovelPattern) novel_flagged = true;
    }
    CHECK(novel_flagged);
}

TEST_CASE("permission revocation denies every binding after a confirmed threat") {
    World w;
    auto eng = w.enroll(930, "revokee", json{{"role", "engineer"},
                                             {"permissions", json::array({"read", "write", "modify", "invoke"})}});
    auto peer = w.enroll(931, "peer3");
    w.agc.register_agent(eng.did(), w.registry.resolve(eng.did()).doc_hash, {{eng.did(), eng.msg_key.public_key}},
                         1, eng.msg_key);

    // grant two distinct capabilities so bindings exist
    for (const auto& [res, act] : std::vector<std::pair<std::string, Action>>{
             {"res://repo", Action::Read}, {"res://line", Action::Modify}}) {
        AccessPolicy p;
        p.resource = res;
        p.action = act;
        p.did_clauses.push_back({"capabilities.role", Comparator::Eq, "engineer"});
        w.acc.deploy_policy(p, w.admin);
        auto out = w.acc.authorize(eng.did(), act, res, {}, eng.msg_key);
        REQUIRE(out.granted);
    }
    auto tokens_before = w.acc.authorize(eng.did(), Action::Read, "res://repo", {}, eng.msg_key);
    CHECK(tokens_before.granted);

    // baseline then a burst from the engineer
    for (int i = 0; i < 6; i++) {
        w.provenance.record_message(eng.did(), peer.did(), sha256_str("b" + std::to_string(i)), eng.msg_key);
        w.ledger.tick(3);
    }
    uint64_t base_end = w.ledger.current_time().logical_timestamp;
    uint64_t attack_start = base_end + 1;
    for (int i = 0; i < 100; i++) {
        w.provenance.record_message(eng.did(), peer.did(), sha256_str("x" + std::to_string(i)), eng.msg_key);
    }
    uint64_t attack_end = w.ledger.current_time().logical_timestamp;

    // signal false is a no-op
    CHECK(w.doe.revoke_permissions(eng.did(), attack_start, attack_end, false).empty());
    CHECK(w.acc.authorize(eng.did(), Action::Read, "res://repo", {}, eng.msg_key).granted);

    auto digests = w.doe.revoke_permissions(eng.did(), attack_start, attack_end, true);
    CHECK(digests.size() == 2);  // one per recorded binding

    // authorization matrix is now all-deny for the agent
    for (int i = 0; i < 100; i++) {
        auto out = w.acc.authorize(eng.did(), i % 2 ? Action::Read : Action::Modify,
                                   i % 2 ? "res://repo" : "res://line", {}, eng.msg_key);
        CHECK_FALSE(out.granted);
        CHECK(out.denial_reason == "deny policy");
    }

    // previously issued unexpired tokens are refused via the revocation list
    REQUIRE(tokens_before.token.has_value());
    CHECK_FALSE(w.acc.verify_token(*tokens_before.token, w.ledger.current_time(), {}));

    // revocation digests are logged on chain
    auto logged = w.ledger.query_events({.kind = "RevocationLogged"});
    CHECK(logged.size() == 2);
}

TEST_CASE("forensic queries reconstruct timelines, graphs and taint warnings") {
    World w;
    auto a = w.enroll(940, "fa");
    auto b = w.enroll(941, "fb");
    auto c = w.enroll(942, "fc");

    // one message edge plus task edges from the initiator to participants
    w.provenance.record_message(a.did(), b.did(), sha256_str("hello"), a.msg_key);
    TaskMetadata meta{a.did(), {b.did(), c.did()}, "forensic task", w.ledger.current_time().logical_timestamp + 10};
    w.provenance.initiate_task(meta, a.msg_key);

    ForensicSpec spec;
    auto report = w.doe.forensic_query(spec);
    CHECK(report.interaction_edges.at({a.did().str(), b.did().str()}) == 2);  // message + task
    CHECK(report.interaction_edges.at({a.did().str(), c.did().str()}) == 1);
    CHECK(report.timeline.size() >= 2);
    CHECK(report.contract_trace.size() == report.timeline.size());

    // empty range produces an empty report
    ForensicSpec empty;
    empty.from_height = 10000;
    empty.to_height = 10001;
    auto none = w.doe.forensic_query(empty);
    CHECK(none.timeline.empty());
    CHECK(none.interaction_edges.empty());

    // a tainted payload reference surfaces as a warning but the query returns
    Bytes payload = to_bytes("audit blob");
    auto anchor = w.provenance.anchor_data(BytesView(payload.data(), payload.size()), a.msg_key);
    w.cas.tamper(anchor.content_id, to_bytes("corrupted"));
    auto tainted = w.doe.forensic_query({});
    CHECK_FALSE(tainted.warnings.empty());
    CHECK_FALSE(tainted.tainted_events.empty());
}

TEST_CASE("single message yields one edge of weight one; repeats accumulate") {
    World w;
    auto a = w.enroll(950, "ga");
    auto b = w.enroll(951, "gb");
    w.provenance.record_message(a.did(), b.did(), sha256_str("m1"), a.msg_key);
    auto r1 = w.doe.forensic_query({});
    CHECK(r1.interaction_edges.size() == 1);
    CHECK(r1.interaction_edges.at({a.did().str(), b.did().str()}) == 1);

    w.provenance.record_message(a.did(), b.did(), sha256_str("m2"), a.msg_key);
    w.provenance.record_message(b.did(), a.did(), sha256_str("m3"), b.msg_key);
    auto r2 = w.doe.forensic_query({});
    CHECK(r2.interaction_edges.at({a.did().str(), b.did().str()}) == 2);
    CHECK(r2.interaction_edges.at({b.did().str(), a.did().str()}) == 1);
}
