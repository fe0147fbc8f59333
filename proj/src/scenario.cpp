#include "blocka2a/scenario.hpp"

#include <chrono>

#include "blocka2a/errors.hpp"

namespace blocka2a {

using nlohmann::json;

std::string_view attack_kind_name(AttackKind k) {
    switch (k) {
        case AttackKind::Jailbreak: return "jailbreak";
        case AttackKind::PromptInjection: return "prompt_injection";
        case AttackKind::PromptInfection: return "prompt_infection";
        case AttackKind::AiTM: return "aitm";
        case AttackKind::FalseDataInjection: return "false_data_injection";
        case AttackKind::RecursiveBlocking: return "recursive_blocking";
        case AttackKind::DarkPersonality: return "dark_personality";
        case AttackKind::MalfunctionAmplification: return "malfunction_amplification";
        case AttackKind::TopologicalExploit: return "topological_exploit";
        case AttackKind::LatencyBypass: return "latency_bypass";
    }
    return "?";
}

AttackKind attack_kind_from_name(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(AttackKind::LatencyBypass); i++) {
        if (attack_kind_name(static_cast<AttackKind>(i)) == s) return static_cast<AttackKind>(i);
    }
    throw FormatError("unknown attack kind: " + std::string(s));
}

std::string_view defense_outcome_name(DefenseOutcome o) {
    switch (o) {
        case DefenseOutcome::Flagged: return "Flagged";
        case DefenseOutcome::Halted: return "Halted";
        case DefenseOutcome::Revoked: return "Revoked";
        case DefenseOutcome::Rejected: return "Rejected";
        case DefenseOutcome::Throttled: return "Throttled";
    }
    return "?";
}

DefenseOutcome defense_outcome_from_name(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(DefenseOutcome::Throttled); i++) {
        if (defense_outcome_name(static_cast<DefenseOutcome>(i)) == s) return static_cast<DefenseOutcome>(i);
    }
    throw FormatError("unknown defense outcome: " + std::string(s));
}

json script_to_json(const ScenarioScript& s) {
    return json{{"name", s.name},
                {"attack", std::string(attack_kind_name(s.attack))},
                {"expected_defense", std::string(defense_outcome_name(s.expected_defense))},
                {"honest_agents", s.honest_agents},
                {"malicious_agent", s.malicious_agent},
                {"attack_enabled", s.attack_enabled},
                {"seed", s.seed}};
}

ScenarioScript script_from_json(const json& j) {
    ScenarioScript s;
    s.name = j.at("name").get<std::string>();
    s.attack = attack_kind_from_name(j.at("attack").get<std::string>());
    s.expected_defense = defense_outcome_from_name(j.at("expected_defense").get<std::string>());
    s.honest_agents = j.value("honest_agents", 3u);
    s.malicious_agent = j.value("malicious_agent", "mallory");
    s.attack_enabled = j.value("attack_enabled", true);
    s.seed = j.value("seed", 42u);
    return s;
}

std::vector<ScenarioScript> builtin_scripts() {
    auto make = [](AttackKind k, DefenseOutcome d) {
        ScenarioScript s;
        s.name = std::string(attack_kind_name(k));
        s.attack = k;
        s.expected_defense = d;
        return s;
    };
    return {
        make(AttackKind::Jailbreak, DefenseOutcome::Rejected),
        make(AttackKind::PromptInjection, DefenseOutcome::Halted),
        make(AttackKind::PromptInfection, DefenseOutcome::Flagged),
        make(AttackKind::AiTM, DefenseOutcome::Rejected),
        make(AttackKind::FalseDataInjection, DefenseOutcome::Rejected),
        make(AttackKind::RecursiveBlocking, DefenseOutcome::Throttled),
        make(AttackKind::DarkPersonality, DefenseOutcome::Revoked),
        make(AttackKind::MalfunctionAmplification, DefenseOutcome::Flagged),
        make(AttackKind::TopologicalExploit, DefenseOutcome::Flagged),
        make(AttackKind::LatencyBypass, DefenseOutcome::Rejected),
    };
}

json report_to_json(const ScenarioReport& r) {
    return json{{"name", r.name},
                {"attack", std::string(attack_kind_name(r.attack))},
                {"expected", std::string(defense_outcome_name(r.expected))},
                {"attack_enabled", r.attack_enabled},
                {"defense_fired", r.defense_fired},
                {"attribution_correct", r.attribution_correct},
                {"attributed_to", r.attributed_to},
                {"detail", r.detail},
                {"alerts", r.alert_count},
                {"halts", r.halt_count},
                {"revocations", r.revocation_count},
                {"containment_ticks", r.containment_ticks},
                {"wall_ms", r.wall_ms},
                {"trust_authenticity", r.trust.authenticity},
                {"trust_integrity", r.trust.integrity},
                {"trust_accountability", r.trust.accountability},
                {"passed", r.passed()}};
}

namespace {

// Everything a scenario needs, built fresh per run.
struct ScenarioWorld {
    Ledger ledger;
    Cas cas;
    DidRegistry registry{ledger, cas};
    KeyPair admin;
    AgcGovernance agc;
    AccessControl acc;
    WorkflowContracts ilc;
    ProvenanceLedger provenance;
    DefenseEngine doe;
    MasAdapter adapter;

    explicit ScenarioWorld(uint64_t seed)
        : admin(generate_keypair(Scheme::Standard, sha256_str("scenario-admin-" + std::to_string(seed)).view())),
          agc(registry, admin),
          acc(registry, generate_keypair(Scheme::Standard, sha256_str("scenario-acc-" + std::to_string(seed)).view()), 300),
          ilc(registry),
          provenance(registry),
          doe(registry, agc, acc, ilc, provenance, admin, 0.95),
          adapter(registry, provenance, seed) {}
};

std::string agent_name(size_t i) { return "agent-" + std::to_string(i); }

struct Roster {
    std::vector<std::string> honest;
    std::string malicious;
};

Roster enroll_roster(ScenarioWorld& w, const ScenarioScript& script) {
    Roster r;
    for (size_t i = 0; i < script.honest_agents; i++) {
        AgentCard card{agent_name(i), "https://" + agent_name(i) + ".example.com/a2a",
                       {"search", "summarize"}, "acme"};
        w.adapter.adapt_identity(card);
        r.honest.push_back(card.name);
    }
    AgentCard mcard{script.malicious_agent, "https://" + script.malicious_agent + ".example.com/a2a",
                    {"search"}, "unknown"};
    w.adapter.adapt_identity(mcard);
    r.malicious = script.malicious_agent;

    // governance records plus reputation priors for the whole roster
    for (const auto& name : w.adapter.agent_names()) {
        const auto& agent = w.adapter.agent(name);
        w.agc.register_agent(agent.did, w.registry.resolve(agent.did).doc_hash,
                             {{agent.did, agent.msg_keys.public_key}}, 1, agent.msg_keys);
        w.doe.ensure_reputation(agent.did);
    }
    return r;
}

// Calm background traffic: greetings, one anchored task with a verified
// milestone, and success outcomes for everyone.
Digest honest_traffic(ScenarioWorld& w, const Roster& roster) {
    for (size_t i = 0; i + 1 < roster.honest.size(); i++) {
        Bytes body = to_bytes("status update " + std::to_string(i));
        auto out = w.adapter.send_message(roster.honest[i], roster.honest[i + 1],
                                          BytesView(body.data(), body.size()));
        if (!out.decision.accepted) throw std::logic_error("honest traffic rejected");
    }
    MasTask task{"task-1", "ctx-7", "submitted", "coordinate the nightly build", roster.honest[0],
                 {roster.honest.begin() + 1, roster.honest.end()}};
    auto rec = w.adapter.record_task(task);
    w.adapter.update_task_status(rec.task_hash, "delivery", roster.honest);
    for (const auto& name : w.adapter.agent_names()) {
        w.doe.update_reputation(w.adapter.agent(name).did, Outcome::Success);
        w.doe.update_reputation(w.adapter.agent(name).did, Outcome::Success);
    }
    return rec.task_hash;
}

struct DefenseCounters {
    size_t alerts{0}, halts{0}, revocations{0};
};

DefenseCounters count_defensive_actions(const Ledger& ledger) {
    DefenseCounters c;
    c.alerts = ledger.query_events({.kind = "DefenseAlert"}).size();
    c.halts = ledger.query_events({.kind = "WorkflowHalted"}).size();
    size_t revs = ledger.query_events({.kind = "RevocationLogged"}).size();
    revs += ledger.query_events({.kind = "PolicyDenyInstalled"}).size();
    c.revocations = revs;
    return c;
}

// A guarded workflow bound to a task, used by the halt scenarios.
std::string deploy_guarded_workflow(ScenarioWorld& w, const Roster& roster, const Digest& task_hash,
                                    uint32_t quorum = 1) {
    WorkflowMachine m;
    m.states = {"working", "review", "done"};
    m.initial = "working";
    m.transitions = {{"working", "progress", "review"}, {"review", "approve", "done"}};
    GuardSpec g;
    g.quorum_k = quorum;
    m.guards["working"] = g;
    m.guards["review"] = g;
    std::vector<Did> participants;
    for (const auto& name : roster.honest) participants.push_back(w.adapter.agent(name).did);
    participants.push_back(w.adapter.agent(roster.malicious).did);
    return w.ilc.deploy(m, participants, w.adapter.agent(roster.honest[0]).msg_keys, task_hash);
}

EventEndorsement endorse(ScenarioWorld& w, const std::string& agent, const std::string& instance,
                         const std::string& state, const std::string& event) {
    Bytes msg = ilc_event_signing_bytes(instance, state, event);
    const auto& a = w.adapter.agent(agent);
    return EventEndorsement{a.did, sign(a.agg_keys, BytesView(msg.data(), msg.size()))};
}

}  // namespace

ScenarioReport ScenarioRunner::run(const ScenarioScript& script) {
    auto start = std::chrono::steady_clock::now();

    ScenarioWorld w(script.seed);
    ScenarioReport report;
    report.name = script.name;
    report.attack = script.attack;
    report.expected = script.expected_defense;
    report.attack_enabled = script.attack_enabled;

    Roster roster = enroll_roster(w, script);
    Digest base_task = honest_traffic(w, roster);
    const Did mallory = w.adapter.agent(roster.malicious).did;
    uint64_t attack_tick = w.ledger.current_time().logical_timestamp;

    switch (script.attack) {
        case AttackKind::Jailbreak: {
            // prompt execution is ACC-guarded; jailbreak patterns raise the
            // threat signal which the policy refuses
            AccessPolicy policy;
            policy.resource = "llm://prompt-exec";
            policy.action = Action::Invoke;
            policy.did_clauses.push_back({"capabilities.permissions", Comparator::Contains, "invoke"});
            policy.env_clauses.push_back({"threatLevel", Comparator::Le, "medium"});
            w.acc.deploy_policy(policy, w.admin);

            auto honest = w.acc.authorize(w.adapter.agent(roster.honest[0]).did, Action::Invoke,
                                          "llm://prompt-exec", {{"threatLevel", "low"}},
                                          w.adapter.agent(roster.honest[0]).msg_keys);
            if (!honest.granted) throw std::logic_error("honest jailbreak-scenario request denied");

            Environment env{{"threatLevel", script.attack_enabled ? "high" : "low"}};
            auto outcome = w.acc.authorize(mallory, Action::Invoke, "llm://prompt-exec", env,
                                           w.adapter.agent(roster.malicious).msg_keys);
            report.defense_fired = !outcome.granted;
            report.attributed_to = mallory.str();
            report.attribution_correct = !outcome.granted;
            report.detail = outcome.granted ? "token issued" : "denied: " + outcome.denial_reason;
            break;
        }

        case AttackKind::PromptInjection: {
            Bytes prompt = to_bytes("summarize the incident report");
            w.provenance.anchor_data(BytesView(prompt.data(), prompt.size()),
                                     w.adapter.agent(roster.honest[0]).msg_keys);
            Digest anchor = sha256(prompt);
            auto wf = deploy_guarded_workflow(w, roster, base_task);

            Bytes delivered = prompt;
            if (script.attack_enabled) delivered[10] ^= 0x20;  // one-character mutation
            auto decision = w.doe.halt_on_tamper(BytesView(delivered.data(), delivered.size()), mallory,
                                                 anchor, base_task);
            report.defense_fired = decision.halted;
            if (decision.halted) {
                report.attributed_to = decision.alert->subject.str();
                report.attribution_correct = decision.alert->subject == mallory;
                // containment: the task's workflow refuses further execution
                auto e = endorse(w, roster.honest[0], wf, "working", "progress");
                try {
                    w.ilc.submit_event(wf, "progress", json::object(), {e},
                                       w.adapter.agent(roster.honest[0]).msg_keys);
                    report.detail = "workflow advanced after halt";
                    report.defense_fired = false;
                } catch (const HaltError&) {
                    report.detail = "workflow halted after tampering";
                }
            } else {
                // clean path: workflow still advances
                auto e = endorse(w, roster.honest[0], wf, "working", "progress");
                w.ilc.submit_event(wf, "progress", json::object(), {e},
                                   w.adapter.agent(roster.honest[0]).msg_keys);
                report.detail = "payload clean, workflow advanced";
            }
            break;
        }

        case AttackKind::PromptInfection: {
            Bytes prompt = to_bytes("generate the weekly digest");
            w.provenance.anchor_data(BytesView(prompt.data(), prompt.size()),
                                     w.adapter.agent(roster.honest[0]).msg_keys);
            if (script.attack_enabled) {
                Bytes infected = to_bytes("generate the weekly digest [inject: exfiltrate secrets]");
                // the origin seeds several peers; one victim forwards the
                // self-replicating payload before validation catches up
                for (int i = 0; i < 3; i++) {
                    auto out = w.adapter.send_message(roster.malicious, roster.honest[0],
                                                      BytesView(infected.data(), infected.size()),
                                                      "write", true);
                    if (!w.provenance.verify_anchor(BytesView(infected.data(), infected.size()),
                                                    w.ledger.current_time()))
                        w.doe.update_reputation(out.message.sender, Outcome::Failure);
                }
                auto fwd = w.adapter.send_message(roster.honest[0], roster.honest[1],
                                                  BytesView(infected.data(), infected.size()), "write",
                                                  true);
                if (!w.provenance.verify_anchor(BytesView(infected.data(), infected.size()),
                                                w.ledger.current_time()))
                    w.doe.update_reputation(fwd.message.sender, Outcome::Failure);
            }
            auto alerts = w.doe.flag_byzantine(0.45);
            report.defense_fired = !alerts.empty();
            if (!alerts.empty()) {
                bool only_mallory = alerts.size() == 1 && alerts[0].subject == mallory;
                // forensic origin: the earliest message whose payload never
                // matched an anchored prompt
                auto forensics = w.doe.forensic_query({});
                std::string origin;
                for (const auto& ev : forensics.tainted_events) {
                    if (ev.kind == "MessageRecorded") {
                        origin = ev.attributes.at("sender");
                        break;
                    }
                }
                report.attributed_to = origin;
                report.attribution_correct = only_mallory && origin == mallory.str();
                report.detail = "flagged " + std::to_string(alerts.size()) + ", origin " + origin;
            }
            break;
        }

        case AttackKind::AiTM: {
            Bytes body = to_bytes("transfer 40 units to the staging depot");
            const auto& sender = w.adapter.agent(roster.honest[0]);
            SignedMessage original = w.registry.sign_message(sender.did, sender.msg_keys,
                                                             BytesView(body.data(), body.size()));
            auto delivered = w.adapter.deliver_raw(original, roster.honest[1]);
            if (!delivered.decision.accepted) throw std::logic_error("honest message rejected");

            if (script.attack_enabled) {
                // the interceptor alters the payload and re-signs with its own
                // key while impersonating the original sender
                SignedMessage forged = original;
                forged.payload = to_bytes("transfer 4000 units to the attacker depot");
                forged.signature = sign(w.adapter.agent(roster.malicious).msg_keys,
                                        BytesView(forged.payload.data(), forged.payload.size()));
                auto out = w.adapter.deliver_raw(forged, roster.honest[1]);
                report.defense_fired = !out.decision.accepted &&
                                       out.decision.reason == RejectReason::Ownership;
                report.attributed_to = roster.malicious;
                report.attribution_correct = report.defense_fired;
                report.detail = "forged message " +
                                std::string(out.decision.accepted ? "accepted" : "rejected (" +
                                            std::string(reject_reason_name(*out.decision.reason)) + ")");
            } else {
                report.detail = "only honest traffic delivered";
            }
            break;
        }

        case AttackKind::FalseDataInjection: {
            ImportOracle oracle(sha256_str("scenario-oracle-" + std::to_string(script.seed)).view());
            w.provenance.configure_oracle(oracle, w.admin);
            int value = script.attack_enabled ? 50 : 150;  // fraudulent feed undershoots the bound
            MockDataSource source("market-feed", json{{"value", value}},
                                  sha256_str("scenario-source-" + std::to_string(script.seed)).view());
            JsonClause predicate{"value", Comparator::Gt, 100};
            try {
                w.provenance.authenticated_import(w.adapter.agent(roster.honest[0]).did, source, oracle,
                                                  predicate, w.adapter.agent(roster.honest[0]).msg_keys,
                                                  script.seed);
                report.detail = "import anchored";
            } catch (const PredicateError& e) {
                report.defense_fired = true;
                report.attributed_to = source.id();
                report.attribution_correct = true;
                report.detail = e.what();
            }
            break;
        }

        case AttackKind::RecursiveBlocking: {
            auto wf = deploy_guarded_workflow(w, roster, base_task);
            const uint64_t bucket = 40;
            // baseline: sparse traffic from everyone
            uint64_t base_start = w.ledger.current_time().logical_timestamp + 1;
            for (int round = 0; round < 4; round++) {
                for (const auto& name : {roster.honest[0], roster.malicious}) {
                    Bytes body = to_bytes("ping " + std::to_string(round));
                    w.adapter.send_message(name, roster.honest[1], BytesView(body.data(), body.size()));
                }
                w.ledger.tick(bucket - 4);
            }
            uint64_t base_end = w.ledger.current_time().logical_timestamp;
            auto baselines = w.doe.build_baselines(base_start, base_end, bucket);

            uint64_t flood_start = w.ledger.current_time().logical_timestamp + 1;
            if (script.attack_enabled) {
                for (int i = 0; i < 40; i++) {
                    Bytes body = to_bytes("are you blocked yet " + std::to_string(i));
                    w.adapter.send_message(roster.malicious, roster.honest[0],
                                           BytesView(body.data(), body.size()));
                }
            }
            auto findings = w.doe.detect_anomaly(flood_start, w.ledger.current_time().logical_timestamp,
                                                 baselines, 3.0, bucket);
            for (const auto& f : findings) {
                if (f.kind != AnomalyKind::RateBurst) continue;
                w.doe.alert_anomalies({f});
                w.doe.throttle(wf, f.did, w.ledger.current_time().logical_timestamp + 100);
                report.defense_fired = true;
                report.attributed_to = f.did.str();
                report.attribution_correct = f.did == mallory;
            }
            if (report.defense_fired) {
                // the flooder is refused while honest participants proceed
                auto em = endorse(w, roster.malicious, wf, "working", "progress");
                try {
                    w.ilc.submit_event(wf, "progress", json::object(), {em},
                                       w.adapter.agent(roster.malicious).msg_keys);
                    report.defense_fired = false;
                    report.detail = "flooder not throttled";
                } catch (const GuardError& e) {
                    report.detail = e.what();
                }
                auto eh = endorse(w, roster.honest[0], wf, "working", "progress");
                w.ilc.submit_event(wf, "progress", json::object(), {eh},
                                   w.adapter.agent(roster.honest[0]).msg_keys);
            }
            break;
        }

        case AttackKind::DarkPersonality: {
            // grant the agent a capability so revocation has bindings to cut
            AccessPolicy policy;
            policy.resource = "res://sensitive-store";
            policy.action = Action::Read;
            policy.did_clauses.push_back({"capabilities.permissions", Comparator::Contains, "read"});
            w.acc.deploy_policy(policy, w.admin);
            auto grant = w.acc.authorize(mallory, Action::Read, "res://sensitive-store", {},
                                         w.adapter.agent(roster.malicious).msg_keys);
            if (!grant.granted) throw std::logic_error("precondition grant failed");

            uint64_t slice_start = w.ledger.current_time().logical_timestamp + 1;
            if (script.attack_enabled) {
                // manipulated interactions surface as a biased failure stream
                for (int i = 0; i < 6; i++) w.doe.update_reputation(mallory, Outcome::Failure);
                auto alerts = w.doe.flag_byzantine(0.4);
                bool flagged_mallory = false;
                for (const auto& a : alerts) {
                    if (a.subject == mallory) flagged_mallory = true;
                }
                auto digests = w.doe.revoke_permissions(mallory, slice_start,
                                                        w.ledger.current_time().logical_timestamp, true);
                auto post = w.acc.authorize(mallory, Action::Read, "res://sensitive-store", {},
                                            w.adapter.agent(roster.malicious).msg_keys);
                report.defense_fired = flagged_mallory && !digests.empty() && !post.granted;
                report.attributed_to = mallory.str();
                report.attribution_correct = report.defense_fired;
                report.detail = "revoked " + std::to_string(digests.size()) + " bindings";
            } else {
                for (int i = 0; i < 6; i++) w.doe.update_reputation(mallory, Outcome::Success);
                report.detail = "behavior stayed nominal";
            }
            break;
        }

        case AttackKind::MalfunctionAmplification: {
            // baseline: a straight workflow run establishes normal patterns
            WorkflowMachine m;
            m.states = {"idle", "busy"};
            m.initial = "idle";
            m.transitions = {{"idle", "start", "busy"}, {"busy", "rework", "idle"}};
            GuardSpec g;
            g.quorum_k = 1;
            m.guards["idle"] = g;
            m.guards["busy"] = g;
            std::vector<Did> participants{w.adapter.agent(roster.honest[0]).did, mallory};

            // baseline: the agent itself performs a normal "start" transition
            uint64_t base_start = w.ledger.current_time().logical_timestamp + 1;
            auto wf1 = w.ilc.deploy(m, participants, w.adapter.agent(roster.malicious).msg_keys);
            auto e = endorse(w, roster.malicious, wf1, "idle", "start");
            json fire{{"op", "fire"}, {"instance", wf1}, {"event", "start"}, {"payload", json::object()},
                      {"signatures", json::array({{{"did", mallory.str()},
                                                   {"sig", to_hex(BytesView(e.signature.bytes.data(),
                                                                            e.signature.bytes.size()))}}})}};
            w.ledger.submit(WorkflowContracts::kContract, to_bytes(fire.dump()),
                            w.adapter.agent(roster.malicious).msg_keys, mallory.str());
            uint64_t base_end = w.ledger.current_time().logical_timestamp;
            auto baselines = w.doe.build_baselines(base_start, base_end);

            uint64_t attack_start = w.ledger.current_time().logical_timestamp + 1;
            if (script.attack_enabled) {
                // redundant rework loop: a transition pattern unseen in baseline
                auto er = endorse(w, roster.malicious, wf1, "busy", "rework");
                json f2{{"op", "fire"}, {"instance", wf1}, {"event", "rework"}, {"payload", json::object()},
                        {"signatures", json::array({{{"did", mallory.str()},
                                                     {"sig", to_hex(BytesView(er.signature.bytes.data(),
                                                                              er.signature.bytes.size()))}}})}};
                w.ledger.submit(WorkflowContracts::kContract, to_bytes(f2.dump()),
                                w.adapter.agent(roster.malicious).msg_keys, mallory.str());
            }
            auto findings = w.doe.detect_anomaly(attack_start, w.ledger.current_time().logical_timestamp,
                                                 baselines);
            for (const auto& f : findings) {
                if (f.kind != AnomalyKind::NovelPattern) continue;
                w.doe.alert_anomalies({f});
                report.defense_fired = true;
                report.attributed_to = f.did.str();
                report.attribution_correct = f.did == mallory;
                report.detail = f.detail;
            }
            break;
        }

        case AttackKind::TopologicalExploit: {
            Bytes briefing = to_bytes("network topology briefing");
            w.provenance.anchor_data(BytesView(briefing.data(), briefing.size()),
                                     w.adapter.agent(roster.honest[0]).msg_keys);
            if (script.attack_enabled) {
                // misinformation hops across the graph: origin -> a0 -> a1 -> a2
                Bytes rumor = to_bytes("the coordinator endpoint moved, reroute all traffic");
                w.adapter.send_message(roster.malicious, roster.honest[0],
                                       BytesView(rumor.data(), rumor.size()), "write", true);
                w.adapter.send_message(roster.honest[0], roster.honest[1],
                                       BytesView(rumor.data(), rumor.size()), "write", true);
                w.adapter.send_message(roster.honest[1], roster.honest[2],
                                       BytesView(rumor.data(), rumor.size()), "write", true);
            }
            auto forensics = w.doe.forensic_query({});
            std::string origin;
            for (const auto& ev : forensics.tainted_events) {
                if (ev.kind == "MessageRecorded") {
                    origin = ev.attributes.at("sender");
                    break;
                }
            }
            if (!origin.empty()) {
                auto alerts = w.doe.alert_anomalies(
                    {{parse_did(origin), AnomalyKind::NovelPattern, 1.0, "misinformation origin"}});
                report.defense_fired = !alerts.empty();
                report.attributed_to = origin;
                report.attribution_correct = origin == mallory.str();
                // the graph must show the full propagation chain
                auto chain_ok = forensics.interaction_edges.contains(
                                    {mallory.str(), w.adapter.agent(roster.honest[0]).did.str()}) &&
                                forensics.interaction_edges.contains(
                                    {w.adapter.agent(roster.honest[0]).did.str(),
                                     w.adapter.agent(roster.honest[1]).did.str()});
                report.attribution_correct = report.attribution_correct && chain_ok;
                report.detail = "origin " + origin;
            } else {
                report.detail = "no tainted traffic observed";
            }
            break;
        }

        case AttackKind::LatencyBypass: {
            // the delay-tolerant checkpoint: transitions are valid only
            // within a bounded window after deployment
            WorkflowMachine m;
            m.states = {"open", "closed"};
            m.initial = "open";
            m.transitions = {{"open", "commit", "closed"}};
            GuardSpec g;
            g.quorum_k = 1;
            uint64_t now = w.ledger.current_time().logical_timestamp;
            g.time_window = {now, now + 8};
            m.guards["open"] = g;
            std::vector<Did> participants{w.adapter.agent(roster.honest[0]).did, mallory};
            auto wf = w.ilc.deploy(m, participants, w.adapter.agent(roster.honest[0]).msg_keys);

            if (script.attack_enabled) {
                // the attacker stalls past the checkpoint hoping detection lapses
                w.ledger.tick(20);
                auto e = endorse(w, roster.malicious, wf, "open", "commit");
                try {
                    w.ilc.submit_event(wf, "commit", json::object(), {e},
                                       w.adapter.agent(roster.malicious).msg_keys);
                    report.detail = "late event accepted";
                } catch (const GuardError& e2) {
                    report.defense_fired = true;
                    report.attributed_to = mallory.str();
                    report.attribution_correct = true;
                    report.detail = e2.what();
                }
            } else {
                auto e = endorse(w, roster.honest[0], wf, "open", "commit");
                w.ilc.submit_event(wf, "commit", json::object(), {e},
                                   w.adapter.agent(roster.honest[0]).msg_keys);
                report.detail = "commit within the checkpoint window";
            }
            break;
        }
    }

    uint64_t containment_tick = w.ledger.current_time().logical_timestamp;
    report.containment_ticks = containment_tick > attack_tick ? containment_tick - attack_tick : 0;

    auto counters = count_defensive_actions(w.ledger);
    report.alert_count = counters.alerts;
    report.halt_count = counters.halts;
    report.revocation_count = counters.revocations;

    report.trust = check_trust_equivalence(w.registry, w.provenance, w.adapter);

    auto end = std::chrono::steady_clock::now();
    report.wall_ms = std::chrono::duration<double, std::milli>(end - start).count();
    return report;
}

}  // namespace blocka2a
