#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "blocka2a/errors.hpp"
#include "fixtures.hpp"

using namespace blocka2a;
using namespace blocka2a::testing;
using nlohmann::json;

namespace {

// The policy from the access-control contract definition: business hours,
// engineer role, threat level at most medium.
AccessPolicy engineering_policy(const std::string& resource = "res://factory/queue") {
    AccessPolicy p;
    p.resource = resource;
    p.action = Action::Modify;
    p.did_clauses.push_back({"capabilities.role", Comparator::Eq, "engineer"});
    p.time_clauses.push_back({.daily = std::string("09:00-17:00")});
    p.env_clauses.push_back({"threatLevel", Comparator::Le, "medium"});
    return p;
}

json engineer_caps() {
    return json{{"role", "engineer"}, {"permissions", json::array({"read", "write", "invoke", "modify"})}};
}

// The supply-chain workflow from the interaction-logic contract definition.
WorkflowMachine order_machine(uint32_t quorum = 1) {
    WorkflowMachine m;
    m.states = {"OrderCreated", "ProductionScheduled", "Shipped"};
    m.initial = "OrderCreated";
    m.transitions = {{"OrderCreated", "PaymentReceived", "ProductionScheduled"},
                     {"ProductionScheduled", "ManufacturingComplete", "Shipped"}};
    GuardSpec g1;
    g1.quorum_k = quorum;
    g1.payload_clauses.push_back({"amount", Comparator::Gt, 0});
    m.guards["OrderCreated"] = g1;
    GuardSpec g2;
    g2.quorum_k = quorum;
    g2.payload_clauses.push_back({"QC_passed", Comparator::Eq, true});
    m.guards["ProductionScheduled"] = g2;
    return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// ACC
// ---------------------------------------------------------------------------

TEST_CASE("acc issues a token exactly in the all-true clause cell") {
    World w;
    auto eng = w.enroll(1, "engineer-a", engineer_caps());
    w.acc.deploy_policy(engineering_policy(), w.admin);

    // paper example: 10:00, engineer, low threat
    auto ok = w.acc.authorize(eng.did(), Action::Modify, "res://factory/queue",
                              {{"time", "10:00"}, {"threatLevel", "low"}}, eng.msg_key);
    CHECK(ok.granted);
    REQUIRE(ok.token.has_value());
    CHECK(ok.token->holder == eng.did());
    CHECK(ok.token->expiry.logical_timestamp > w.ledger.current_time().logical_timestamp);

    // outside the window
    auto late = w.acc.authorize(eng.did(), Action::Modify, "res://factory/queue",
                                {{"time", "20:00"}, {"threatLevel", "low"}}, eng.msg_key);
    CHECK_FALSE(late.granted);
    CHECK(late.denial_reason.find("temporal") != std::string::npos);

    // high threat
    auto hot = w.acc.authorize(eng.did(), Action::Modify, "res://factory/queue",
                               {{"time", "10:00"}, {"threatLevel", "high"}}, eng.msg_key);
    CHECK_FALSE(hot.granted);
}

TEST_CASE("acc truth table: issuance only at (T,T,T) over the three clauses") {
    World w;
    auto eng = w.enroll(2, "engineer-b", engineer_caps());
    auto intern = w.enroll(3, "intern", json{{"role", "intern"}, {"permissions", json::array({"read"})}});
    w.acc.deploy_policy(engineering_policy(), w.admin);

    for (int mask = 0; mask < 8; mask++) {
        bool time_ok = mask & 1, role_ok = mask & 2, env_ok = mask & 4;
        const TestAgent& requester = role_ok ? eng : intern;
        Environment env{{"time", time_ok ? "10:00" : "20:00"}, {"threatLevel", env_ok ? "low" : "high"}};
        auto outcome = w.acc.authorize(requester.did(), Action::Modify, "res://factory/queue", env,
                                       requester.msg_key);
        CHECK(outcome.granted == (time_ok && role_ok && env_ok));
    }
}

TEST_CASE("acc rejects requests without a deployed policy and revoked requesters") {
    World w;
    auto eng = w.enroll(4, "engineer-c", engineer_caps());
    CHECK_THROWS_AS(w.acc.authorize(eng.did(), Action::Read, "res://void", {}, eng.msg_key), PolicyError);

    w.acc.deploy_policy(engineering_policy("res://guarded"), w.admin);
    w.agc.register_agent(eng.did(), w.registry.resolve(eng.did()).doc_hash, {{eng.did(), eng.msg_key.public_key}},
                         1, eng.msg_key);
    w.agc.revoke(eng.did(), w.admin);
    CHECK_THROWS_AS(w.acc.authorize(eng.did(), Action::Modify, "res://guarded",
                                    {{"time", "10:00"}, {"threatLevel", "low"}}, eng.msg_key),
                    AuthError);
}

TEST_CASE("token verification: freshness, expiry, context recency, forgery") {
    World w;
    auto eng = w.enroll(5, "engineer-d", engineer_caps());
    w.acc.deploy_policy(engineering_policy(), w.admin);
    Environment env{{"time", "10:00"}, {"threatLevel", "low"}};
    auto outcome = w.acc.authorize(eng.did(), Action::Modify, "res://factory/queue", env, eng.msg_key);
    REQUIRE(outcome.granted);
    CapabilityToken token = *outcome.token;

    CHECK(w.acc.verify_token(token, w.ledger.current_time(), env));

    // expiry sweep: valid strictly before the expiry tick, never after
    for (uint64_t t = token.expiry.logical_timestamp - 2; t <= token.expiry.logical_timestamp + 2; t++) {
        CHECK(w.acc.verify_token(token, LedgerTime::at(t), env) == (t < token.expiry.logical_timestamp));
    }

    // context recency
    Environment other_env{{"time", "10:01"}, {"threatLevel", "low"}};
    CHECK_FALSE(w.acc.verify_token(token, w.ledger.current_time(), other_env));

    // forgery oracle: tokens re-signed with random non-issuer keys must fail
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; i++) {
        Bytes seed(32);
        for (auto& b : seed) b = static_cast<uint8_t>(rng());
        KeyPair forger = generate_keypair(Scheme::Standard, BytesView(seed.data(), seed.size()));
        CapabilityToken forged = token;
        Bytes msg = token_signing_bytes(forged);
        forged.issuer_signature = sign(forger, BytesView(msg.data(), msg.size()));
        CHECK_FALSE(w.acc.verify_token(forged, w.ledger.current_time(), env));
    }
}

TEST_CASE("least privilege: a token authorizes exactly its action-resource pair") {
    World w;
    auto eng = w.enroll(6, "engineer-e", engineer_caps());
    for (auto action : {Action::Read, Action::Modify}) {
        for (const auto& res : {"res://a", "res://b"}) {
            AccessPolicy p = engineering_policy(res);
            p.action = action;
            w.acc.deploy_policy(p, w.admin);
        }
    }
    Environment env{{"time", "10:00"}, {"threatLevel", "low"}};
    auto outcome = w.acc.authorize(eng.did(), Action::Read, "res://a", env, eng.msg_key);
    REQUIRE(outcome.granted);
    CapabilityToken token = *outcome.token;

    std::mt19937_64 rng(8);
    for (int i = 0; i < 50; i++) {
        CapabilityToken probe = token;
        probe.action = (rng() % 2) ? Action::Read : Action::Modify;
        probe.resource = (rng() % 2) ? "res://a" : "res://b";
        bool same_pair = probe.action == token.action && probe.resource == token.resource;
        CHECK(w.acc.verify_token(probe, w.ledger.current_time(), env) == same_pair);
    }
}

// ---------------------------------------------------------------------------
// ILC
// ---------------------------------------------------------------------------

TEST_CASE("ilc deploys the order machine and rejects malformed machines") {
    World w;
    auto a = w.enroll(10, "wf-a");
    auto id = w.ilc.deploy(order_machine(), {a.did()}, a.msg_key);
    CHECK(w.ilc.instance(id).current == "OrderCreated");

    WorkflowMachine bad = order_machine();
    bad.transitions.push_back({"Shipped", "Ghost", "Nowhere"});
    CHECK_THROWS_AS(w.ilc.deploy(bad, {a.did()}, a.msg_key), ValidationError);

    WorkflowMachine empty;
    CHECK_THROWS_AS(w.ilc.deploy(empty, {a.did()}, a.msg_key), ValidationError);

    WorkflowMachine dup = order_machine();
    dup.transitions.push_back({"OrderCreated", "PaymentReceived", "Shipped"});
    CHECK_THROWS_AS(w.ilc.deploy(dup, {a.did()}, a.msg_key), ValidationError);
}

TEST_CASE("ilc advances only when guards hold") {
    World w;
    auto a = w.enroll(11, "wf-b");
    auto b = w.enroll(12, "wf-c");
    auto id = w.ilc.deploy(order_machine(1), {a.did(), b.did()}, a.msg_key);

    // guard amount > 0 with quorum met
    auto e1 = w.ilc_endorsement(a, id, "OrderCreated", "PaymentReceived");
    auto state = w.ilc.submit_event(id, "PaymentReceived", json{{"amount", 5}}, {e1}, a.msg_key);
    CHECK(state == "ProductionScheduled");

    // QC_passed = false refused
    auto e2 = w.ilc_endorsement(a, id, "ProductionScheduled", "ManufacturingComplete");
    CHECK_THROWS_AS(
        w.ilc.submit_event(id, "ManufacturingComplete", json{{"QC_passed", false}}, {e2}, a.msg_key),
        GuardError);
    CHECK(w.ilc.instance(id).current == "ProductionScheduled");

    // QC_passed = true advances
    state = w.ilc.submit_event(id, "ManufacturingComplete", json{{"QC_passed", true}}, {e2}, a.msg_key);
    CHECK(state == "Shipped");

    // log replays deterministically
    auto log = w.ilc.transition_log(id);
    REQUIRE(log.size() == 2);
    CHECK(log[0].from == "OrderCreated");
    CHECK(log[1].to == "Shipped");
    CHECK(w.ilc.audit_transitions(id));
}

TEST_CASE("ilc guard failures: amount, quorum, undefined transitions, membership") {
    World w;
    auto a = w.enroll(13, "wf-d");
    auto b = w.enroll(14, "wf-e");
    auto c = w.enroll(15, "wf-f");
    auto id = w.ilc.deploy(order_machine(2), {a.did(), b.did(), c.did()}, a.msg_key);

    // amount <= 0
    auto ea = w.ilc_endorsement(a, id, "OrderCreated", "PaymentReceived");
    auto eb = w.ilc_endorsement(b, id, "OrderCreated", "PaymentReceived");
    CHECK_THROWS_AS(w.ilc.submit_event(id, "PaymentReceived", json{{"amount", 0}}, {ea, eb}, a.msg_key),
                    GuardError);

    // 1 of 2 signatures
    CHECK_THROWS_AS(w.ilc.submit_event(id, "PaymentReceived", json{{"amount", 5}}, {ea}, a.msg_key),
                    GuardError);

    // undefined event at the current state
    CHECK_THROWS_AS(w.ilc.submit_event(id, "ManufacturingComplete", json{{"QC_passed", true}}, {ea, eb},
                                       a.msg_key),
                    TransitionError);

    // non-participant signer
    auto outsider = w.enroll(16, "outsider");
    auto ex = w.ilc_endorsement(outsider, id, "OrderCreated", "PaymentReceived");
    CHECK_THROWS_AS(w.ilc.submit_event(id, "PaymentReceived", json{{"amount", 5}}, {ea, ex}, a.msg_key),
                    MembershipError);

    // signatures over the wrong state do not count toward quorum
    auto wrong = w.ilc_endorsement(b, id, "ProductionScheduled", "PaymentReceived");
    CHECK_THROWS_AS(w.ilc.submit_event(id, "PaymentReceived", json{{"amount", 5}}, {ea, wrong}, a.msg_key),
                    GuardError);
}

TEST_CASE("ilc time-window guards enforce the configured range") {
    World w;
    auto a = w.enroll(17, "wf-g");
    WorkflowMachine m = order_machine(1);
    m.guards["OrderCreated"].time_window = {2, 6};
    auto id = w.ilc.deploy(m, {a.did()}, a.msg_key);

    w.ledger.tick(10);  // now well past the window
    auto e = w.ilc_endorsement(a, id, "OrderCreated", "PaymentReceived");
    CHECK_THROWS_AS(w.ilc.submit_event(id, "PaymentReceived", json{{"amount", 5}}, {e}, a.msg_key),
                    GuardError);
}

TEST_CASE("ilc halt and suspension block events until lifted") {
    World w;
    auto a = w.enroll(18, "wf-h");
    auto id = w.ilc.deploy(order_machine(1), {a.did()}, a.msg_key);

    w.ilc.halt(id, w.admin);
    auto e = w.ilc_endorsement(a, id, "OrderCreated", "PaymentReceived");
    CHECK_THROWS_AS(w.ilc.submit_event(id, "PaymentReceived", json{{"amount", 5}}, {e}, a.msg_key), HaltError);

    auto nobody = generate_keypair(Scheme::Standard, seed_of(999));
    CHECK_THROWS_AS(w.ilc.unhalt(id, nobody), AuthError);
    w.ilc.unhalt(id, w.admin);

    w.ilc.suspend(id, a.did(), w.ledger.current_time().logical_timestamp + 5, w.admin);
    CHECK_THROWS_AS(w.ilc.submit_event(id, "PaymentReceived", json{{"amount", 5}}, {e}, a.msg_key), GuardError);
    w.ledger.tick(6);
    CHECK(w.ilc.submit_event(id, "PaymentReceived", json{{"amount", 5}}, {e}, a.msg_key) ==
          "ProductionScheduled");
}

TEST_CASE("ilc determinism: replaying recorded tuples reproduces the final state") {
    World w;
    auto a = w.enroll(19, "wf-i");
    auto id = w.ilc.deploy(order_machine(1), {a.did()}, a.msg_key);
    auto e1 = w.ilc_endorsement(a, id, "OrderCreated", "PaymentReceived");
    w.ilc.submit_event(id, "PaymentReceived", json{{"amount", 1}}, {e1}, a.msg_key);
    auto e2 = w.ilc_endorsement(a, id, "ProductionScheduled", "ManufacturingComplete");
    w.ilc.submit_event(id, "ManufacturingComplete", json{{"QC_passed", true}}, {e2}, a.msg_key);

    auto inst = w.ilc.instance(id);
    std::string replay = inst.machine.initial;
    for (const auto& rec : w.ilc.transition_log(id)) {
        bool advanced = false;
        for (const auto& t : inst.machine.transitions) {
            if (t.from == replay && t.event == rec.event) {
                replay = t.to;
                advanced = true;
            }
        }
        CHECK(advanced);
        CHECK(replay == rec.to);
    }
    CHECK(replay == inst.current);
    CHECK(w.ilc.audit_transitions(id));
}

// ---------------------------------------------------------------------------
// AGC
// ---------------------------------------------------------------------------

TEST_CASE("agc lifecycle: register, duplicate, malformed") {
    World w;
    auto a = w.enroll(20, "gov-a");
    auto rec = w.agc.register_agent(a.did(), w.registry.resolve(a.did()).doc_hash,
                                    {{a.did(), a.msg_key.public_key}}, 1, a.msg_key);
    CHECK(rec.state == AgcState::Active);
    CHECK(rec.state_trace == std::vector<std::string>{"Created", "Active"});
    CHECK_FALSE(rec.valid_until.has_value());

    CHECK_THROWS_AS(w.agc.register_agent(a.did(), rec.root_hash, {{a.did(), a.msg_key.public_key}}, 1,
                                         a.msg_key),
                    DuplicateError);

    json bad{{"op", "register"}, {"did", "did:blocka2a:has space"}, {"doc_hash", rec.root_hash.hex()},
             {"controllers", json::array()}, {"quorum_k", 1}};
    Receipt r = w.ledger.submit(AgcGovernance::kContract, to_bytes(bad.dump()), a.msg_key, "x");
    CHECK_FALSE(r.ok);
    CHECK(r.error.find("malformed did") != std::string::npos);
}

TEST_CASE("agc update: quorum rules over three controllers with k = 2") {
    World w;
    auto a = w.enroll(21, "gov-b");
    std::vector<TestAgent> controllers{w.enroll(22, "ctrl-1"), w.enroll(23, "ctrl-2"), w.enroll(24, "ctrl-3")};
    std::vector<AgcController> cs;
    for (const auto& c : controllers) cs.push_back({c.did(), c.msg_key.public_key});
    w.agc.register_agent(a.did(), w.registry.resolve(a.did()).doc_hash, cs, 2, a.msg_key);

    // brute force over all approval subsets; update succeeds exactly when >= 2
    int successes = 0;
    for (uint32_t mask = 0; mask < 8; mask++) {
        DidDocument updated = a.doc;
        updated.capabilities["revision"] = std::to_string(mask + 1);
        Digest new_hash = document_hash(updated);
        std::vector<ControllerApproval> approvals;
        for (size_t i = 0; i < 3; i++) {
            if (!(mask & (1u << i))) continue;
            Bytes msg = agc_update_signing_bytes(a.did(), new_hash);
            approvals.push_back({controllers[i].did(), sign(controllers[i].msg_key, BytesView(msg.data(), msg.size()))});
        }
        size_t count = approvals.size();
        if (count >= 2) {
            auto rec = w.agc.update(a.did(), updated, approvals, a.msg_key);
            CHECK(rec.root_hash == new_hash);
            successes++;
        } else {
            CHECK_THROWS_AS(w.agc.update(a.did(), updated, approvals, a.msg_key), QuorumError);
        }
    }
    CHECK(successes == 4);  // exactly the subsets of size >= 2
}

TEST_CASE("agc update syncs the identity layer and bumps the version") {
    World w;
    auto a = w.enroll(25, "gov-c");
    auto base = w.registry.resolve(a.did());
    CHECK(base.version == 1);
    w.agc.register_agent(a.did(), base.doc_hash, {{a.did(), a.msg_key.public_key}}, 1, a.msg_key);

    DidDocument updated = a.doc;
    updated.capabilities["extra"] = "image_recognition";
    Digest new_hash = document_hash(updated);
    Bytes msg = agc_update_signing_bytes(a.did(), new_hash);
    std::vector<ControllerApproval> approvals{{a.did(), sign(a.msg_key, BytesView(msg.data(), msg.size()))}};
    w.agc.update(a.did(), updated, approvals, a.msg_key);

    auto after = w.registry.resolve(a.did());
    CHECK(after.version == 2);
    CHECK(after.doc_hash == new_hash);
    auto fetched = w.registry.fetch_document(a.did());
    CHECK(fetched.capabilities.at("extra") == "image_recognition");

    // unchanged hash is a no-op error
    CHECK_THROWS_AS(w.agc.update(a.did(), updated, approvals, a.msg_key), ValidationError);
}

TEST_CASE("agc revoke: admin only, terminal, idempotent") {
    World w;
    auto a = w.enroll(26, "gov-d");
    w.agc.register_agent(a.did(), w.registry.resolve(a.did()).doc_hash, {{a.did(), a.msg_key.public_key}}, 1,
                         a.msg_key);

    CHECK_THROWS_AS(w.agc.revoke(a.did(), a.msg_key), AuthError);  // not the admin

    auto rec = w.agc.revoke(a.did(), w.admin);
    CHECK(rec.state == AgcState::Revoked);
    CHECK(w.registry.resolve(a.did()).revocation_status);

    // verify_message now rejects the revoked sender
    auto msg = SignedMessage{a.did(), to_bytes("hello"), sign(a.msg_key, BytesView(to_bytes("hello").data(), 5)),
                             a.did().str() + "#key-1"};
    auto d = w.registry.verify_message(msg, "read");
    CHECK_FALSE(d.accepted);
    CHECK(d.reason == RejectReason::Revoked);

    // idempotent second revoke
    CHECK(w.agc.revoke(a.did(), w.admin).state == AgcState::Revoked);

    // zombie update attempt
    DidDocument updated = a.doc;
    updated.capabilities["zombie"] = true;
    Digest new_hash = document_hash(updated);
    Bytes m2 = agc_update_signing_bytes(a.did(), new_hash);
    std::vector<ControllerApproval> approvals{{a.did(), sign(a.msg_key, BytesView(m2.data(), m2.size()))}};
    CHECK_THROWS_AS(w.agc.update(a.did(), updated, approvals, a.msg_key), FinalityError);
}

TEST_CASE("agc model check: no sequence up to length 6 resurrects a revoked did") {
    // operations: 0 = update, 1 = revoke, 2 = annotate; applied after registration
    for (uint32_t seq = 0; seq < 3 * 3 * 3 * 3 * 3 * 3; seq += 7) {  // stride keeps the sweep fast
        World w;
        auto a = w.enroll(27, "gov-seq");
        w.agc.register_agent(a.did(), w.registry.resolve(a.did()).doc_hash,
                             {{a.did(), a.msg_key.public_key}}, 1, a.msg_key);
        uint32_t s = seq;
        int revision = 0;
        for (int step = 0; step < 6; step++) {
            int op = s % 3;
            s /= 3;
            AgcRecord before = w.agc.record(a.did());
            try {
                if (op == 0) {
                    DidDocument updated = a.doc;
                    updated.capabilities["rev"] = ++revision;
                    Digest h = document_hash(updated);
                    Bytes m = agc_update_signing_bytes(a.did(), h);
                    w.agc.update(a.did(), updated, {{a.did(), sign(a.msg_key, BytesView(m.data(), m.size()))}},
                                 a.msg_key);
                } else if (op == 1) {
                    w.agc.revoke(a.did(), w.admin);
                } else {
                    json ann{{"op", "annotate"}, {"did", a.did().str()}, {"note", "n" + std::to_string(step)}};
                    w.ledger.submit(AgcGovernance::kContract, to_bytes(ann.dump()), w.admin, "doe");
                }
            } catch (const std::exception&) {
                // rejected operations must not change lifecycle state
            }
            AgcRecord after = w.agc.record(a.did());
            if (before.state == AgcState::Revoked) CHECK(after.state == AgcState::Revoked);
        }
        // the trace may never leave Revoked once entered
        auto trace = w.agc.record(a.did()).state_trace;
        bool seen_revoked = false;
        for (const auto& label : trace) {
            if (seen_revoked) CHECK(label == "Revoked");
            if (label == "Revoked") seen_revoked = true;
        }
    }
}

TEST_CASE("agc resolve returns a verifying merkle proof against the commitment") {
    World w;
    std::vector<TestAgent> agents;
    for (uint64_t i = 0; i < 5; i++) {
        agents.push_back(w.enroll(30 + i, "gov-m" + std::to_string(i)));
        w.agc.register_agent(agents.back().did(), w.registry.resolve(agents.back().did()).doc_hash,
                             {{agents.back().did(), agents.back().msg_key.public_key}}, 1,
                             agents.back().msg_key);
    }
    for (const auto& a : agents) {
        auto res = w.agc.resolve(a.did());
        CHECK(res.state == AgcState::Active);
        Bytes leaf = AgcGovernance::commitment_leaf(a.did().str(), res.root_hash);
        CHECK(merkle_verify(res.commitment_root, BytesView(leaf.data(), leaf.size()), res.proof));
    }
    CHECK_THROWS_AS(w.agc.resolve(Did{"missing"}), NotFoundError);
}

TEST_CASE("agc version monotonicity: root hash differs across consecutive updates") {
    World w;
    auto a = w.enroll(40, "gov-mono");
    w.agc.register_agent(a.did(), w.registry.resolve(a.did()).doc_hash, {{a.did(), a.msg_key.public_key}}, 1,
                         a.msg_key);
    Digest prev = w.agc.record(a.did()).root_hash;
    uint64_t prev_version = w.registry.resolve(a.did()).version;
    for (int i = 0; i < 4; i++) {
        DidDocument updated = a.doc;
        updated.capabilities["step"] = i;
        Digest h = document_hash(updated);
        Bytes m = agc_update_signing_bytes(a.did(), h);
        w.agc.update(a.did(), updated, {{a.did(), sign(a.msg_key, BytesView(m.data(), m.size()))}}, a.msg_key);
        CHECK(w.agc.record(a.did()).root_hash != prev);
        CHECK(w.registry.resolve(a.did()).version == prev_version + 1);
        prev = w.agc.record(a.did()).root_hash;
        prev_version++;
    }
}
