// blocka2a: command-line simulator for the agent trust fabric. State lives in
// a workspace directory: a replayable transaction journal plus the
// content-addressed blob store, so every invocation reconstructs the same
// deterministic ledger before applying new commands.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "blocka2a/bench.hpp"
#include "blocka2a/cross_domain.hpp"
#include "blocka2a/errors.hpp"
#include "blocka2a/journal.hpp"
#include "blocka2a/scenario.hpp"

using namespace blocka2a;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Workspace {
    fs::path root;
    Ledger ledger;
    Cas cas;
    std::unique_ptr<DidRegistry> registry;
    std::unique_ptr<AgcGovernance> agc;
    std::unique_ptr<AccessControl> acc;
    std::unique_ptr<WorkflowContracts> ilc;
    std::unique_ptr<ProvenanceLedger> provenance;
    std::unique_ptr<DefenseEngine> doe;
    KeyPair admin;

    explicit Workspace(const fs::path& dir, const std::string& journal_override) : root(dir) {
        fs::create_directories(root / "cas");
        fs::create_directories(root / "agents");

        // stable service keys so contract configuration replays identically
        json cfg;
        fs::path cfg_path = root / "config.json";
        if (fs::exists(cfg_path)) {
            std::ifstream in(cfg_path);
            in >> cfg;
        } else {
            cfg["admin_seed"] = sha256_str("workspace-admin-" + root.string()).hex();
            cfg["acc_seed"] = sha256_str("workspace-acc-" + root.string()).hex();
            std::ofstream out(cfg_path);
            out << cfg.dump(2) << "\n";
        }
        admin = generate_keypair(Scheme::Standard,
                                 Digest::from_hex_str(cfg.at("admin_seed").get<std::string>()).view());
        KeyPair acc_keys = generate_keypair(
            Scheme::Standard, Digest::from_hex_str(cfg.at("acc_seed").get<std::string>()).view());

        for (const auto& entry : fs::directory_iterator(root / "cas")) {
            std::ifstream in(entry.path(), std::ios::binary);
            Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            cas.put(data);
        }

        // install every contract, replay the journal, then attach it so new
        // transactions (including first-run init) land at stable heights
        registry = std::make_unique<DidRegistry>(ledger, cas);
        MigrationService::install(ledger);
        TrustAnchorBridge::install(ledger);
        AgcGovernance::install(ledger);
        AccessControl::install(ledger, cas, acc_keys.public_key, acc_keys.secret, 300);
        WorkflowContracts::install(ledger, cas);
        ProvenanceLedger::install(ledger, cas);
        DefenseEngine::install_contracts(ledger, 0.95);

        fs::path journal = journal_override.empty() ? root / "journal.ndjson" : fs::path(journal_override);
        if (fs::exists(journal)) journal_replay(journal.string(), ledger);
        ledger.attach_journal(journal.string());

        agc = std::make_unique<AgcGovernance>(*registry, admin);
        acc = std::make_unique<AccessControl>(*registry, acc_keys, 300);
        ilc = std::make_unique<WorkflowContracts>(*registry);
        provenance = std::make_unique<ProvenanceLedger>(*registry);
        doe = std::make_unique<DefenseEngine>(*registry, *agc, *acc, *ilc, *provenance, admin, 0.95);
    }

    void persist_cas() {
        cas.for_each([&](const Digest& digest, const Bytes& bytes) {
            fs::path p = root / "cas" / digest.hex();
            if (fs::exists(p)) return;
            std::ofstream out(p, std::ios::binary);
            out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        });
    }

    struct NamedAgent {
        std::string name;
        KeyPair msg_keys;
        KeyPair agg_keys;
        Did did;
    };

    NamedAgent load_agent(const std::string& name) {
        fs::path p = root / "agents" / (name + ".json");
        if (!fs::exists(p)) throw NotFoundError("no agent named " + name + "; run 'agent new " + name + "'");
        std::ifstream in(p);
        json j;
        in >> j;
        NamedAgent a;
        a.name = name;
        Digest seed = Digest::from_hex_str(j.at("seed").get<std::string>());
        a.msg_keys = generate_keypair(Scheme::Standard, seed.view());
        Bytes agg_seed(seed.bytes.begin(), seed.bytes.end());
        agg_seed.push_back(0x42);
        a.agg_keys = generate_keypair(Scheme::Aggregatable, sha256(agg_seed).view());
        a.did = parse_did(j.at("did").get<std::string>());
        return a;
    }
};

Bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    in >> j;
    return j;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= s.size()) {
        size_t comma = s.find(',', start);
        std::string part = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!part.empty()) out.push_back(part);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

Environment parse_env_pairs(const std::vector<std::string>& kvs) {
    Environment env;
    for (const auto& kv : kvs) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ValidationError("environment entries must be key=value: " + kv);
        env[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return env;
}

JsonClause parse_predicate(const std::string& s) {
    std::istringstream in(s);
    std::string path, cmp, literal;
    in >> path >> cmp >> literal;
    if (path.empty() || cmp.empty() || literal.empty())
        throw ValidationError("predicate must be '<path> <cmp> <literal>': " + s);
    json lit;
    try {
        lit = json::parse(literal);
    } catch (...) {
        lit = literal;
    }
    return JsonClause{path, comparator_from_name(cmp), lit};
}

int cmd_agent_new(Workspace& ws, const std::string& name, const std::vector<std::string>& skills,
                  const std::string& role) {
    fs::path p = ws.root / "agents" / (name + ".json");
    if (fs::exists(p)) throw DuplicateError("agent " + name + " already exists");
    Digest seed = sha256_str("agent-seed-" + ws.root.string() + "-" + name);
    KeyPair msg_keys = generate_keypair(Scheme::Standard, seed.view());
    Bytes agg_seed(seed.bytes.begin(), seed.bytes.end());
    agg_seed.push_back(0x42);
    KeyPair agg_keys = generate_keypair(Scheme::Aggregatable, sha256(agg_seed).view());

    Did did = generate_did(BytesView(msg_keys.public_key.data(), msg_keys.public_key.size()));
    DidDocument doc;
    doc.id = did;
    doc.public_keys.push_back({did.str() + "#key-1", Scheme::Standard, msg_keys.public_key, {}});
    doc.public_keys.push_back(
        {did.str() + "#key-2", Scheme::Aggregatable, agg_keys.public_key, prove_possession(agg_keys)});
    doc.services.push_back({"AgentCommunicationEndpoint", "https://" + name + ".example.com/api"});
    doc.capabilities = json{{"permissions", json::array({"read", "write", "invoke"})}};
    if (!skills.empty()) doc.capabilities["skills"] = skills;
    if (!role.empty()) doc.capabilities["role"] = role;
    auto rec = ws.registry->register_did(doc, msg_keys);

    std::ofstream out(p);
    out << json{{"name", name}, {"seed", seed.hex()}, {"did", did.str()}}.dump(2) << "\n";
    std::cout << json{{"did", did.str()}, {"doc_hash", rec.doc_hash.hex()}, {"version", rec.version}}.dump()
              << "\n";
    return 0;
}

int cmd_did_verify_msg(Workspace& ws, const std::string& msg_path, const std::string& action,
                       const std::string& time_of_day) {
    json j = read_json(msg_path);
    SignedMessage msg;
    msg.sender = parse_did(j.at("sender").get<std::string>());
    msg.payload = from_hex(j.at("payload").get<std::string>());
    msg.signature.scheme = scheme_from_name(j.value("scheme", "Ed25519VerificationKey2020"));
    msg.signature.bytes = from_hex(j.at("signature").get<std::string>());
    msg.key_id = j.at("key_id").get<std::string>();
    RequestContext ctx;
    if (!time_of_day.empty()) ctx["time"] = time_of_day;
    auto decision = ws.registry->verify_message(msg, action, ctx);
    json out{{"accepted", decision.accepted}};
    if (!decision.accepted) {
        out["reason"] = std::string(reject_reason_name(*decision.reason));
        out["detail"] = decision.detail;
    }
    std::cout << out.dump() << "\n";
    return decision.accepted ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"blocka2a: decentralized agent trust fabric simulator"};
    app.require_subcommand(1);

    std::string workspace = ".blocka2a";
    std::string journal_path;
    std::string legacy_registry_path;
    std::string source_path;
    app.add_option("--workspace", workspace, "state directory (journal, blobs, agent keys)");
    app.add_option("--journal", journal_path, "override the ledger journal file");
    app.add_option("--legacy-registry", legacy_registry_path, "legacy identity registry JSON");
    app.add_option("--source", source_path, "mock data source fixture JSON");

    auto* agent = app.add_subcommand("agent", "manage simulated agents");
    auto* agent_new = agent->add_subcommand("new", "create keys and register a DID");
    std::string an_name, an_role, an_skills;
    agent_new->add_option("name", an_name)->required();
    agent_new->add_option("--skills", an_skills, "comma-separated skill list");
    agent_new->add_option("--role", an_role, "role capability");

    auto* did = app.add_subcommand("did", "identity layer operations");
    auto* did_register = did->add_subcommand("register", "register a DID document file");
    std::string dr_doc, dr_agent;
    did_register->add_option("doc", dr_doc)->required();
    did_register->add_option("--agent", dr_agent, "submitting agent")->required();
    auto* did_resolve = did->add_subcommand("resolve", "resolve a DID to its on-chain record");
    std::string dres_did;
    did_resolve->add_option("did", dres_did)->required();
    auto* did_sign = did->add_subcommand("sign-msg", "produce a signed message file");
    std::string ds_agent, ds_payload, ds_out;
    did_sign->add_option("--agent", ds_agent)->required();
    did_sign->add_option("--payload", ds_payload)->required();
    did_sign->add_option("-o,--out", ds_out, "output file (default: stdout)");
    auto* did_verify = did->add_subcommand("verify-msg", "verify a signed message file");
    std::string dv_file, dv_action = "read", dv_time;
    did_verify->add_option("msg", dv_file)->required();
    did_verify->add_option("--action", dv_action);
    did_verify->add_option("--time", dv_time, "HH:MM request time");

    auto* task = app.add_subcommand("task", "provenance task lifecycle");
    auto* task_init = task->add_subcommand("init", "initiate a task");
    std::string ti_initiator, ti_participants, ti_description;
    uint64_t ti_deadline = 1000;
    task_init->add_option("--initiator", ti_initiator)->required();
    task_init->add_option("--participants", ti_participants, "comma-separated agent names")->required();
    task_init->add_option("--description", ti_description)->required();
    task_init->add_option("--deadline", ti_deadline);
    auto* task_sign = task->add_subcommand("sign", "produce a milestone endorsement");
    std::string ts_task, ts_milestone, ts_agent;
    task_sign->add_option("milestone", ts_milestone)->required();
    task_sign->add_option("--task", ts_task)->required();
    task_sign->add_option("--agent", ts_agent)->required();
    auto* task_transition = task->add_subcommand("transition", "submit a milestone transition");
    std::string tt_task, tt_milestone, tt_signers;
    task_transition->add_option("--task", tt_task)->required();
    task_transition->add_option("--milestone", tt_milestone)->required();
    task_transition->add_option("--signers", tt_signers, "comma-separated agent names")->required();
    auto* task_show = task->add_subcommand("show", "print a task record");
    std::string tsh_task;
    task_show->add_option("--task", tsh_task)->required();

    auto* anchor = app.add_subcommand("anchor", "payload anchoring");
    auto* anchor_put = anchor->add_subcommand("put", "anchor a file");
    std::string ap_file, ap_agent;
    anchor_put->add_option("file", ap_file)->required();
    anchor_put->add_option("--agent", ap_agent)->required();
    auto* anchor_verify = anchor->add_subcommand("verify", "verify a file against the anchor store");
    std::string av_file;
    int64_t av_asof = -1;
    anchor_verify->add_option("file", av_file)->required();
    anchor_verify->add_option("--as-of", av_asof, "logical tick (default: now)");

    auto* import_cmd = app.add_subcommand("import", "authenticated data import via the oracle");
    std::string imp_agent, imp_predicate = "value gt 100";
    uint64_t imp_seed = 1;
    import_cmd->add_option("--agent", imp_agent)->required();
    import_cmd->add_option("--predicate", imp_predicate, "'<path> <cmp> <literal>'");
    import_cmd->add_option("--seed", imp_seed, "key-exchange seed");

    auto* acc_cmd = app.add_subcommand("acc", "access control contracts");
    auto* acc_deploy = acc_cmd->add_subcommand("deploy-policy", "deploy a policy file");
    std::string ad_file;
    acc_deploy->add_option("file", ad_file)->required();
    auto* acc_auth = acc_cmd->add_subcommand("authorize", "request a capability token");
    std::string aa_agent, aa_action, aa_resource;
    std::vector<std::string> aa_env;
    acc_auth->add_option("--agent", aa_agent)->required();
    acc_auth->add_option("--action", aa_action)->required();
    acc_auth->add_option("--resource", aa_resource)->required();
    acc_auth->add_option("--env", aa_env, "environment key=value entries");

    auto* ilc_cmd = app.add_subcommand("ilc", "interaction logic contracts");
    auto* ilc_deploy = ilc_cmd->add_subcommand("deploy", "deploy a workflow machine file");
    std::string id_file, id_participants, id_task;
    ilc_deploy->add_option("file", id_file)->required();
    ilc_deploy->add_option("--participants", id_participants)->required();
    ilc_deploy->add_option("--task", id_task, "attach to a task hash");
    auto* ilc_fire = ilc_cmd->add_subcommand("fire", "submit a workflow event");
    std::string if_instance, if_event, if_signers;
    std::vector<std::string> if_payload;
    ilc_fire->add_option("event", if_event)->required();
    ilc_fire->add_option("--instance", if_instance)->required();
    ilc_fire->add_option("--signers", if_signers)->required();
    ilc_fire->add_option("--payload", if_payload, "payload key=value entries");

    auto* agc_cmd = app.add_subcommand("agc", "agent governance contracts");
    auto* agc_register = agc_cmd->add_subcommand("register", "register an agent under governance");
    std::string gr_agent, gr_controllers;
    uint32_t gr_quorum = 1;
    agc_register->add_option("--agent", gr_agent)->required();
    agc_register->add_option("--controllers", gr_controllers, "agent names (default: the agent itself)");
    agc_register->add_option("--quorum", gr_quorum);
    auto* agc_update = agc_cmd->add_subcommand("update", "quorum-approved capability update");
    std::string gu_agent, gu_approvers;
    std::vector<std::string> gu_caps;
    agc_update->add_option("--agent", gu_agent)->required();
    agc_update->add_option("--capability", gu_caps, "key=value additions")->required();
    agc_update->add_option("--approvers", gu_approvers)->required();
    auto* agc_revoke = agc_cmd->add_subcommand("revoke", "revoke a DID (admin credential)");
    std::string gv_did;
    agc_revoke->add_option("--did", gv_did)->required();
    auto* agc_resolve = agc_cmd->add_subcommand("resolve", "resolve a governance record");
    std::string gres_did;
    agc_resolve->add_option("--did", gres_did)->required();

    auto* doe_cmd = app.add_subcommand("doe", "defense orchestration engine");
    auto* doe_watch = doe_cmd->add_subcommand("watch", "print anchored alerts as JSON lines");
    auto* doe_flag = doe_cmd->add_subcommand("flag", "run byzantine flagging");
    double df_tau = 0.5;
    doe_flag->add_option("--tau", df_tau);
    auto* doe_forensics = doe_cmd->add_subcommand("forensics", "reconstruct a timeline");
    int64_t dfo_from = -1, dfo_to = -1;
    bool dfo_graph = false;
    doe_forensics->add_option("--from", dfo_from);
    doe_forensics->add_option("--to", dfo_to);
    doe_forensics->add_flag("--graph", dfo_graph);
    auto* doe_rep = doe_cmd->add_subcommand("reputation", "feed an interaction outcome");
    std::string drp_agent, drp_outcome = "success";
    doe_rep->add_option("--agent", drp_agent)->required();
    doe_rep->add_option("--outcome", drp_outcome)->check(CLI::IsMember({"success", "failure"}));

    auto* migrate_cmd = app.add_subcommand("migrate", "legacy identity migration");
    std::string mg_legacy_id, mg_agent;
    migrate_cmd->add_option("legacy_id", mg_legacy_id)->required();
    migrate_cmd->add_option("--agent", mg_agent)->required();

    auto* scenario_cmd = app.add_subcommand("scenario", "attack scenario runner");
    auto* scenario_run = scenario_cmd->add_subcommand("run", "run a scenario script");
    std::string sr_file, sr_builtin;
    bool sr_all = false, sr_baselines = false;
    scenario_run->add_option("script", sr_file, "scenario script JSON");
    scenario_run->add_option("--builtin", sr_builtin, "builtin scenario name");
    scenario_run->add_flag("--all", sr_all, "run every builtin attack row");
    scenario_run->add_flag("--with-baselines", sr_baselines, "also run honest baselines");
    auto* scenario_list = scenario_cmd->add_subcommand("list", "list builtin scenarios");

    auto* bench_cmd = app.add_subcommand("bench", "latency benchmarks");
    std::string b_suite;
    size_t b_runs = 10;
    bool b_json = false;
    bench_cmd->add_option("suite", b_suite)->required()->check(CLI::IsMember({"core_ops", "doe_algorithms"}));
    bench_cmd->add_option("--runs", b_runs);
    bench_cmd->add_flag("--json", b_json);

    CLI11_PARSE(app, argc, argv);

    try {
        if (scenario_list->parsed()) {
            for (const auto& s : builtin_scripts()) std::cout << script_to_json(s).dump() << "\n";
            return 0;
        }
        if (scenario_run->parsed()) {
            std::vector<ScenarioScript> scripts;
            if (sr_all) {
                scripts = builtin_scripts();
            } else if (!sr_builtin.empty()) {
                for (const auto& s : builtin_scripts()) {
                    if (s.name == sr_builtin) scripts.push_back(s);
                }
                if (scripts.empty()) throw NotFoundError("no builtin scenario named " + sr_builtin);
            } else if (!sr_file.empty()) {
                scripts.push_back(script_from_json(read_json(sr_file)));
            } else {
                throw ValidationError("scenario run needs a script file, --builtin or --all");
            }
            if (sr_baselines) {
                auto attack_scripts = scripts;
                for (auto s : attack_scripts) {
                    s.attack_enabled = false;
                    s.name += "-baseline";
                    scripts.push_back(s);
                }
            }
            ScenarioRunner runner;
            bool all_ok = true;
            for (const auto& s : scripts) {
                auto report = runner.run(s);
                std::cout << report_to_json(report).dump() << "\n";
                all_ok = all_ok && report.passed();
            }
            return all_ok ? 0 : 1;
        }
        if (bench_cmd->parsed()) {
            auto report = run_bench(b_suite == "core_ops" ? BenchSuite::CoreOps : BenchSuite::DoeAlgorithms,
                                    b_runs);
            if (b_json) {
                std::cout << bench_report_to_json(report).dump(2) << "\n";
            } else {
                std::cout << render_bench_table(report);
            }
            return 0;
        }

        Workspace ws(workspace, journal_path);
        int rc = 0;

        if (agent_new->parsed()) {
            rc = cmd_agent_new(ws, an_name, split_csv(an_skills), an_role);
        } else if (did_register->parsed()) {
            DidDocument doc = document_from_json(read_json(dr_doc));
            auto submitting = ws.load_agent(dr_agent);
            auto rec = ws.registry->register_did(doc, submitting.msg_keys);
            std::cout << json{{"did", rec.did.str()}, {"doc_hash", rec.doc_hash.hex()}}.dump() << "\n";
        } else if (did_resolve->parsed()) {
            auto rec = ws.registry->resolve(parse_did(dres_did));
            std::cout << json{{"did", rec.did.str()},
                              {"version", rec.version},
                              {"doc_hash", rec.doc_hash.hex()},
                              {"registered_at", rec.registered_at.block_height},
                              {"revocation_status", rec.revocation_status},
                              {"controller_address", rec.controller_address}}
                             .dump()
                      << "\n";
        } else if (did_sign->parsed()) {
            auto signer = ws.load_agent(ds_agent);
            Bytes payload = to_bytes(ds_payload);
            auto msg = ws.registry->sign_message(signer.did, signer.msg_keys,
                                                 BytesView(payload.data(), payload.size()));
            json out{{"sender", msg.sender.str()},
                     {"payload", to_hex(BytesView(msg.payload.data(), msg.payload.size()))},
                     {"scheme", std::string(scheme_name(msg.signature.scheme))},
                     {"signature", to_hex(BytesView(msg.signature.bytes.data(), msg.signature.bytes.size()))},
                     {"key_id", msg.key_id}};
            if (ds_out.empty()) {
                std::cout << out.dump() << "\n";
            } else {
                std::ofstream f(ds_out);
                f << out.dump() << "\n";
                std::cout << json{{"written", ds_out}}.dump() << "\n";
            }
        } else if (did_verify->parsed()) {
            rc = cmd_did_verify_msg(ws, dv_file, dv_action, dv_time);
        } else if (task_init->parsed()) {
            auto initiator = ws.load_agent(ti_initiator);
            TaskMetadata meta;
            meta.initiator = initiator.did;
            for (const auto& name : split_csv(ti_participants))
                meta.participants.push_back(ws.load_agent(name).did);
            meta.description = ti_description;
            meta.deadline = ti_deadline;
            auto rec = ws.provenance->initiate_task(meta, initiator.msg_keys);
            std::cout << json{{"task_hash", rec.task_hash.hex()}, {"status", rec.status}}.dump() << "\n";
        } else if (task_sign->parsed()) {
            auto signer = ws.load_agent(ts_agent);
            Digest h = Digest::from_hex_str(ts_task);
            Bytes msg = milestone_signing_bytes(h, ts_milestone);
            Signature sig = sign(signer.agg_keys, BytesView(msg.data(), msg.size()));
            std::cout << json{{"did", signer.did.str()},
                              {"milestone", ts_milestone},
                              {"sig", to_hex(BytesView(sig.bytes.data(), sig.bytes.size()))}}
                             .dump()
                      << "\n";
        } else if (task_transition->parsed()) {
            Digest h = Digest::from_hex_str(tt_task);
            std::vector<std::pair<Did, Signature>> sigs;
            Bytes msg = milestone_signing_bytes(h, tt_milestone);
            for (const auto& name : split_csv(tt_signers)) {
                auto a = ws.load_agent(name);
                sigs.emplace_back(a.did, sign(a.agg_keys, BytesView(msg.data(), msg.size())));
            }
            auto submitter = ws.load_agent(split_csv(tt_signers).front());
            auto rec = ws.provenance->transition_state(h, tt_milestone, sigs, submitter.msg_keys);
            std::cout << json{{"task_hash", rec.task_hash.hex()}, {"status", rec.status}}.dump() << "\n";
        } else if (task_show->parsed()) {
            auto rec = ws.provenance->task(Digest::from_hex_str(tsh_task));
            json history = json::array();
            for (const auto& [label, t] : rec.status_history)
                history.push_back({{"label", label}, {"time", t.logical_timestamp}});
            std::cout << json{{"task_hash", rec.task_hash.hex()},
                              {"status", rec.status},
                              {"history", history},
                              {"metadata_cid", rec.metadata_cid.hex()}}
                             .dump()
                      << "\n";
        } else if (anchor_put->parsed()) {
            auto submitter = ws.load_agent(ap_agent);
            Bytes payload = read_file(ap_file);
            auto rec = ws.provenance->anchor_data(BytesView(payload.data(), payload.size()), submitter.msg_keys);
            std::cout << json{{"payload_hash", rec.payload_hash.hex()},
                              {"content_id", rec.content_id.hex()},
                              {"anchored_at", rec.anchored_at.logical_timestamp}}
                             .dump()
                      << "\n";
        } else if (anchor_verify->parsed()) {
            Bytes payload = read_file(av_file);
            LedgerTime as_of =
                av_asof < 0 ? ws.ledger.current_time() : LedgerTime::at(static_cast<uint64_t>(av_asof));
            bool ok = ws.provenance->verify_anchor(BytesView(payload.data(), payload.size()), as_of);
            std::cout << json{{"verified", ok}}.dump() << "\n";
            rc = ok ? 0 : 1;
        } else if (import_cmd->parsed()) {
            if (source_path.empty()) throw ValidationError("import requires --source <fixture.json>");
            json fixture = read_json(source_path);
            ImportOracle oracle(sha256_str("workspace-oracle-" + workspace).view());
            if (!ws.ledger.state_get(ProvenanceLedger::kContract, "_oracle"))
                ws.provenance->configure_oracle(oracle, ws.admin);
            MockDataSource source(fixture.at("source_id").get<std::string>(), fixture.at("response"),
                                  sha256_str(fixture.value("seed", "fixture-seed")).view());
            auto requester = ws.load_agent(imp_agent);
            auto rec = ws.provenance->authenticated_import(requester.did, source, oracle,
                                                           parse_predicate(imp_predicate),
                                                           requester.msg_keys, imp_seed);
            std::cout << json{{"data_hash", rec.data_hash.hex()},
                              {"source_id", rec.source_id},
                              {"attestation", rec.predicate_attestation}}
                             .dump()
                      << "\n";
        } else if (acc_deploy->parsed()) {
            ws.acc->deploy_policy(access_policy_from_json(read_json(ad_file)), ws.admin);
            std::cout << json{{"deployed", true}}.dump() << "\n";
        } else if (acc_auth->parsed()) {
            auto requester = ws.load_agent(aa_agent);
            auto outcome = ws.acc->authorize(requester.did, action_from_name(aa_action), aa_resource,
                                             parse_env_pairs(aa_env), requester.msg_keys);
            json out{{"granted", outcome.granted}};
            if (outcome.granted) {
                out["token"] = token_to_json(*outcome.token);
            } else {
                out["denial_reason"] = outcome.denial_reason;
            }
            std::cout << out.dump() << "\n";
            rc = outcome.granted ? 0 : 1;
        } else if (ilc_deploy->parsed()) {
            WorkflowMachine machine = machine_from_json(read_json(id_file));
            std::vector<Did> participants;
            for (const auto& name : split_csv(id_participants))
                participants.push_back(ws.load_agent(name).did);
            std::optional<Digest> attached;
            if (!id_task.empty()) attached = Digest::from_hex_str(id_task);
            auto submitter = ws.load_agent(split_csv(id_participants).front());
            auto instance = ws.ilc->deploy(machine, participants, submitter.msg_keys, attached);
            std::cout << json{{"instance", instance}, {"initial", machine.initial}}.dump() << "\n";
        } else if (ilc_fire->parsed()) {
            auto inst = ws.ilc->instance(if_instance);
            json payload = json::object();
            for (const auto& kv : if_payload) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) throw ValidationError("payload entries must be key=value");
                std::string value = kv.substr(eq + 1);
                try {
                    payload[kv.substr(0, eq)] = json::parse(value);
                } catch (...) {
                    payload[kv.substr(0, eq)] = value;
                }
            }
            std::vector<EventEndorsement> sigs;
            Bytes msg = ilc_event_signing_bytes(if_instance, inst.current, if_event);
            for (const auto& name : split_csv(if_signers)) {
                auto a = ws.load_agent(name);
                sigs.push_back({a.did, sign(a.agg_keys, BytesView(msg.data(), msg.size()))});
            }
            auto submitter = ws.load_agent(split_csv(if_signers).front());
            auto state = ws.ilc->submit_event(if_instance, if_event, payload, sigs, submitter.msg_keys);
            std::cout << json{{"instance", if_instance}, {"state", state}}.dump() << "\n";
        } else if (agc_register->parsed()) {
            auto subject = ws.load_agent(gr_agent);
            std::vector<AgcController> controllers;
            auto names = split_csv(gr_controllers);
            if (names.empty()) names.push_back(gr_agent);
            for (const auto& n : names) {
                auto c = ws.load_agent(n);
                controllers.push_back({c.did, c.msg_keys.public_key});
            }
            auto rec = ws.agc->register_agent(subject.did, ws.registry->resolve(subject.did).doc_hash,
                                              controllers, gr_quorum, subject.msg_keys);
            std::cout << json{{"did", rec.did.str()}, {"state", std::string(agc_state_name(rec.state))}}.dump()
                      << "\n";
        } else if (agc_update->parsed()) {
            auto subject = ws.load_agent(gu_agent);
            DidDocument doc = ws.registry->fetch_document(subject.did);
            for (const auto& kv : gu_caps) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) throw ValidationError("capability entries must be key=value");
                doc.capabilities[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
            Digest new_hash = document_hash(doc);
            Bytes msg = agc_update_signing_bytes(subject.did, new_hash);
            std::vector<ControllerApproval> approvals;
            for (const auto& n : split_csv(gu_approvers)) {
                auto c = ws.load_agent(n);
                approvals.push_back({c.did, sign(c.msg_keys, BytesView(msg.data(), msg.size()))});
            }
            auto rec = ws.agc->update(subject.did, doc, approvals, subject.msg_keys);
            std::cout << json{{"did", rec.did.str()}, {"root_hash", rec.root_hash.hex()}}.dump() << "\n";
        } else if (agc_revoke->parsed()) {
            auto rec = ws.agc->revoke(parse_did(gv_did), ws.admin);
            std::cout << json{{"did", rec.did.str()}, {"state", std::string(agc_state_name(rec.state))}}.dump()
                      << "\n";
        } else if (agc_resolve->parsed()) {
            auto res = ws.agc->resolve(parse_did(gres_did));
            Bytes leaf = AgcGovernance::commitment_leaf(gres_did, res.root_hash);
            std::cout << json{{"root_hash", res.root_hash.hex()},
                              {"state", std::string(agc_state_name(res.state))},
                              {"valid_from", res.valid_from.logical_timestamp},
                              {"commitment_root", res.commitment_root.hex()},
                              {"proof_verified",
                               merkle_verify(res.commitment_root, BytesView(leaf.data(), leaf.size()), res.proof)}}
                             .dump()
                      << "\n";
        } else if (doe_watch->parsed()) {
            for (const auto& alert : ws.doe->alerts()) {
                json line{{"id", alert.id},
                          {"kind", std::string(alert_kind_name(alert.kind))},
                          {"subject", alert.subject.str()},
                          {"reason", alert.reason},
                          {"confidence", alert.confidence},
                          {"time", alert.time.logical_timestamp}};
                if (alert.evidence_cid) line["evidence_cid"] = alert.evidence_cid->hex();
                std::cout << line.dump() << "\n";
            }
        } else if (doe_flag->parsed()) {
            auto alerts = ws.doe->flag_byzantine(df_tau);
            for (const auto& alert : alerts) {
                std::cout << json{{"id", alert.id},
                                  {"subject", alert.subject.str()},
                                  {"reason", alert.reason},
                                  {"confidence", alert.confidence}}
                                 .dump()
                          << "\n";
            }
            std::cout << json{{"flagged", alerts.size()}}.dump() << "\n";
        } else if (doe_forensics->parsed()) {
            ForensicSpec spec;
            if (dfo_from >= 0) spec.from_height = static_cast<uint64_t>(dfo_from);
            if (dfo_to >= 0) spec.to_height = static_cast<uint64_t>(dfo_to);
            spec.build_graph = dfo_graph;
            auto report = ws.doe->forensic_query(spec);
            json timeline = json::array();
            for (const auto& ev : report.timeline) {
                timeline.push_back({{"height", ev.time.block_height},
                                    {"contract", ev.emitting_contract},
                                    {"kind", ev.kind},
                                    {"attributes", ev.attributes}});
            }
            json out{{"timeline", timeline}, {"warnings", report.warnings}};
            if (dfo_graph) {
                json edges = json::array();
                for (const auto& [edge, count] : report.interaction_edges) {
                    edges.push_back({{"from", edge.first}, {"to", edge.second}, {"count", count}});
                }
                out["graph"] = edges;
            }
            std::cout << out.dump(2) << "\n";
        } else if (doe_rep->parsed()) {
            auto subject = ws.load_agent(drp_agent);
            ws.doe->ensure_reputation(subject.did);
            auto score = ws.doe->update_reputation(
                subject.did, drp_outcome == "success" ? Outcome::Success : Outcome::Failure);
            std::cout << json{{"did", score.did.str()}, {"score", score.score()}}.dump() << "\n";
        } else if (migrate_cmd->parsed()) {
            if (legacy_registry_path.empty())
                throw ValidationError("migration requires --legacy-registry <registry.json>");
            LegacyRegistry legacy;
            legacy.load_file(legacy_registry_path);
            LegacyOracle oracle(legacy, sha256_str("workspace-legacy-oracle").view());
            MigrationCommittee committee(5, 3, sha256_str("workspace-committee").view());
            MigrationService migration(*ws.registry, committee, oracle, legacy, 0.9);
            auto holder = ws.load_agent(mg_agent);
            // the protocol mints a fresh key pair for the migrated identity
            KeyPair fresh = generate_keypair(
                Scheme::Standard,
                sha256_str("migration-key-" + workspace + "-" + mg_agent + "-" + mg_legacy_id).view());
            auto mc = migration.migrate_legacy(mg_legacy_id, fresh, holder.msg_keys);
            std::cout << json{{"did", mc.did.str()},
                              {"legacy_id", mc.legacy_id},
                              {"attributes", mc.attributes},
                              {"verified", migration.verify_credential(mc)}}
                             .dump()
                      << "\n";
        }

        ws.persist_cas();
        return rc;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
