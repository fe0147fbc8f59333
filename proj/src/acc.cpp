#include "blocka2a/contracts/acc.hpp"

#include <algorithm>

#include "blocka2a/errors.hpp"

namespace blocka2a {

using nlohmann::json;

// ---------------------------------------------------------------------------
// shared contract helpers
// ---------------------------------------------------------------------------

std::string_view action_name(Action a) {
    switch (a) {
        case Action::Read: return "read";
        case Action::Modify: return "modify";
        case Action::Invoke: return "invoke";
        case Action::Delete: return "delete";
    }
    return "?";
}

Action action_from_name(std::string_view s) {
    if (s == "read") return Action::Read;
    if (s == "modify") return Action::Modify;
    if (s == "invoke") return Action::Invoke;
    if (s == "delete") return Action::Delete;
    throw FormatError("unknown action: " + std::string(s));
}

std::string_view comparator_name(Comparator c) {
    switch (c) {
        case Comparator::Eq: return "eq";
        case Comparator::Ne: return "ne";
        case Comparator::Lt: return "lt";
        case Comparator::Le: return "le";
        case Comparator::Gt: return "gt";
        case Comparator::Ge: return "ge";
        case Comparator::Contains: return "contains";
    }
    return "?";
}

Comparator comparator_from_name(std::string_view s) {
    if (s == "eq") return Comparator::Eq;
    if (s == "ne") return Comparator::Ne;
    if (s == "lt") return Comparator::Lt;
    if (s == "le") return Comparator::Le;
    if (s == "gt") return Comparator::Gt;
    if (s == "ge") return Comparator::Ge;
    if (s == "contains") return Comparator::Contains;
    throw FormatError("unknown comparator: " + std::string(s));
}

std::optional<int> threat_level_rank(const std::string& v) {
    if (v == "low") return 0;
    if (v == "medium") return 1;
    if (v == "high") return 2;
    return std::nullopt;
}

bool compare_values(const std::string& lhs, Comparator cmp, const std::string& rhs) {
    int order;
    auto lt = threat_level_rank(lhs), rt = threat_level_rank(rhs);
    if (lt && rt) {
        order = (*lt < *rt) ? -1 : (*lt > *rt ? 1 : 0);
    } else {
        bool numeric = !lhs.empty() && !rhs.empty() &&
                       lhs.find_first_not_of("-0123456789.") == std::string::npos &&
                       rhs.find_first_not_of("-0123456789.") == std::string::npos;
        if (numeric) {
            double l = std::stod(lhs), r = std::stod(rhs);
            order = (l < r) ? -1 : (l > r ? 1 : 0);
        } else {
            int c = lhs.compare(rhs);
            order = (c < 0) ? -1 : (c > 0 ? 1 : 0);
        }
    }
    switch (cmp) {
        case Comparator::Eq: return order == 0;
        case Comparator::Ne: return order != 0;
        case Comparator::Lt: return order < 0;
        case Comparator::Le: return order <= 0;
        case Comparator::Gt: return order > 0;
        case Comparator::Ge: return order >= 0;
        case Comparator::Contains: return false;
    }
    return false;
}

namespace {

std::string json_scalar_to_string(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

const json* resolve_path(const json& doc, const std::string& path) {
    const json* cur = &doc;
    size_t start = 0;
    while (start <= path.size()) {
        size_t dot = path.find('.', start);
        std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!cur->is_object() || !cur->contains(part)) return nullptr;
        cur = &cur->at(part);
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return cur;
}

}  // namespace

bool JsonClause::evaluate(const json& doc) const {
    const json* v = resolve_path(doc, path);
    if (!v) return false;  // unknown attribute references evaluate to false
    if (cmp == Comparator::Contains) {
        if (!v->is_array()) return false;
        return std::any_of(v->begin(), v->end(), [&](const json& e) { return e == literal; });
    }
    return compare_values(json_scalar_to_string(*v), cmp, json_scalar_to_string(literal));
}

JsonClause clause_from_json(const json& j) {
    JsonClause c;
    c.path = j.at("path").get<std::string>();
    c.cmp = comparator_from_name(j.value("cmp", "eq"));
    c.literal = j.at("value");
    return c;
}

json clause_to_json(const JsonClause& c) {
    return json{{"path", c.path}, {"cmp", std::string(comparator_name(c.cmp))}, {"value", c.literal}};
}

void rethrow_receipt(const Receipt& r) {
    const std::string& e = r.error;
    auto has = [&](std::string_view needle) { return e.find(needle) != std::string::npos; };
    if (has("policy not found")) throw PolicyError(e);
    if (has("duplicate") || has("already registered") || has("already exists")) throw DuplicateError(e);
    if (has("not registered") || has("not found") || has("unknown task") || has("unknown did")) throw NotFoundError(e);
    if (has("malformed did") || has("format error")) throw FormatError(e);
    if (has("auth error") || has("not allowed") || has("admin credential")) throw AuthError(e);
    if (has("guard error")) throw GuardError(e);
    if (has("quorum")) throw QuorumError(e);
    if (has("no-op")) throw ValidationError(e);
    if (has("finality")) throw FinalityError(e);
    if (has("halt")) throw HaltError(e);
    if (has("undefined transition")) throw TransitionError(e);
    if (has("membership")) throw MembershipError(e);
    if (has("participant")) throw ParticipantError(e);
    if (has("signature error")) throw SignatureError(e);
    if (has("policy not found")) throw PolicyError(e);
    if (has("size")) throw SizeError(e);
    if (has("predicate")) throw PredicateError(e);
    if (has("sybil")) throw SybilError(e);
    if (has("validation") || has("invalid") || has("malformed")) throw ValidationError(e);
    throw std::runtime_error(e);
}

// ---------------------------------------------------------------------------
// ACC: policies, tokens, the access-control contract
// ---------------------------------------------------------------------------

namespace {

json policy_to_json_impl(const AccessPolicy& p) {
    json j;
    j["resource"] = p.resource;
    j["action"] = std::string(action_name(p.action));
    j["did_clauses"] = json::array();
    for (const auto& c : p.did_clauses) j["did_clauses"].push_back(clause_to_json(c));
    j["time_clauses"] = json::array();
    for (const auto& c : p.time_clauses) {
        json tc = json::object();
        if (c.daily) tc["daily"] = *c.daily;
        if (c.absolute) tc["absolute"] = json::array({c.absolute->first, c.absolute->second});
        j["time_clauses"].push_back(tc);
    }
    j["env_clauses"] = json::array();
    for (const auto& c : p.env_clauses) {
        j["env_clauses"].push_back(
            {{"key", c.key}, {"cmp", std::string(comparator_name(c.cmp))}, {"value", c.literal}});
    }
    j["context_free_tokens"] = p.context_free_tokens;
    return j;
}

AccessPolicy policy_from_json_impl(const json& j) {
    AccessPolicy p;
    p.resource = j.at("resource").get<std::string>();
    p.action = action_from_name(j.at("action").get<std::string>());
    for (const auto& c : j.value("did_clauses", json::array())) p.did_clauses.push_back(clause_from_json(c));
    for (const auto& c : j.value("time_clauses", json::array())) {
        TimeWindowClause tc;
        if (c.contains("daily")) tc.daily = c.at("daily").get<std::string>();
        if (c.contains("absolute"))
            tc.absolute = std::pair<uint64_t, uint64_t>{c.at("absolute")[0].get<uint64_t>(),
                                                        c.at("absolute")[1].get<uint64_t>()};
        p.time_clauses.push_back(std::move(tc));
    }
    for (const auto& c : j.value("env_clauses", json::array())) {
        p.env_clauses.push_back({c.at("key").get<std::string>(), comparator_from_name(c.value("cmp", "eq")),
                                 c.at("value").get<std::string>()});
    }
    p.context_free_tokens = j.value("context_free_tokens", false);
    return p;
}

std::string policy_key(const std::string& resource, Action action) {
    return "policy/" + resource + "#" + std::string(action_name(action));
}

std::string deny_key(const std::string& did, const std::string& resource, std::string_view action) {
    return "deny/" + did + "/" + resource + "#" + std::string(action);
}

}  // namespace

AccessPolicy access_policy_from_json(const nlohmann::json& j) { return policy_from_json_impl(j); }
nlohmann::json access_policy_to_json(const AccessPolicy& p) { return policy_to_json_impl(p); }

Digest environment_snapshot_hash(const Environment& env) {
    json j(env);
    return sha256_str(j.dump());
}

Bytes token_signing_bytes(const CapabilityToken& t) {
    Bytes buf;
    append_field(buf, std::string_view("capability-token"));
    append_field(buf, t.holder.str());
    append_field(buf, action_name(t.action));
    append_field(buf, t.resource);
    append_u64_be(buf, t.expiry.block_height);
    append_field(buf, t.context_snapshot.hex());
    buf.push_back(t.context_free ? 1 : 0);
    return buf;
}

json token_to_json(const CapabilityToken& t) {
    return json{{"holder", t.holder.str()},
                {"action", std::string(action_name(t.action))},
                {"resource", t.resource},
                {"expiry", t.expiry.block_height},
                {"context_snapshot", t.context_snapshot.hex()},
                {"context_free", t.context_free},
                {"signature", to_hex(BytesView(t.issuer_signature.bytes.data(), t.issuer_signature.bytes.size()))}};
}

CapabilityToken token_from_json(const json& j) {
    CapabilityToken t;
    t.holder = parse_did(j.at("holder").get<std::string>());
    t.action = action_from_name(j.at("action").get<std::string>());
    t.resource = j.at("resource").get<std::string>();
    t.expiry = LedgerTime::at(j.at("expiry").get<uint64_t>());
    t.context_snapshot = Digest::from_hex_str(j.at("context_snapshot").get<std::string>());
    t.context_free = j.at("context_free").get<bool>();
    t.issuer_signature = Signature{Scheme::Standard, from_hex(j.at("signature").get<std::string>())};
    return t;
}

bool AccessPolicy::evaluate(const nlohmann::json& did_document, LedgerTime now, const Environment& env,
                            std::string* failing) const {
    for (const auto& c : did_clauses) {
        if (!c.evaluate(did_document)) {
            if (failing) *failing = "did clause on " + c.path;
            return false;
        }
    }
    for (const auto& c : time_clauses) {
        if (c.daily) {
            auto it = env.find("time");
            if (it == env.end() || !time_within_daily_window(*c.daily, it->second)) {
                if (failing) *failing = "temporal clause " + *c.daily;
                return false;
            }
        }
        if (c.absolute) {
            if (now.logical_timestamp < c.absolute->first || now.logical_timestamp > c.absolute->second) {
                if (failing) *failing = "absolute time window";
                return false;
            }
        }
    }
    for (const auto& c : env_clauses) {
        auto it = env.find(c.key);
        if (it == env.end() || !compare_values(it->second, c.cmp, c.literal)) {
            if (failing) *failing = "environment clause on " + c.key;
            return false;
        }
    }
    return true;
}

void AccessControl::install(Ledger& ledger, const Cas& cas, Bytes acc_public_key, Bytes acc_secret,
                            uint64_t token_ttl) {
    if (ledger.has_contract(kContract)) return;
    KeyPair acc_keys{Scheme::Standard, std::move(acc_secret), std::move(acc_public_key)};
    const Cas* cas_ptr = &cas;
    ledger.register_contract(kContract, [acc_keys, cas_ptr, token_ttl](ContractContext& ctx) {
        json p = json::parse(to_string(BytesView(ctx.payload().data(), ctx.payload().size())));
        std::string op = p.at("op").get<std::string>();

        if (op == "deploy_policy") {
            AccessPolicy policy = policy_from_json_impl(p.at("policy"));
            ctx.put(kContract, policy_key(policy.resource, policy.action), p.at("policy").dump());
            ctx.emit("PolicyDeployed",
                     {{"resource", policy.resource}, {"action", std::string(action_name(policy.action))}});
            return;
        }

        if (op == "authorize") {
            Did requester = parse_did(p.at("did").get<std::string>());
            Action action = action_from_name(p.at("action").get<std::string>());
            std::string resource = p.at("resource").get<std::string>();
            Environment env = p.value("environment", Environment{});

            auto raw = ctx.get(kContract, policy_key(resource, action));
            if (!raw) throw PolicyError("policy not found for " + resource + "#" +
                                        std::string(action_name(action)));

            auto rec_raw = ctx.get(DidRegistry::kNamespace, requester.str());
            if (!rec_raw) throw NotFoundError("requester did not registered");
            json rec = json::parse(*rec_raw);
            if (rec.at("revocation_status").get<bool>()) throw AuthError("auth error: requester is revoked");

            // deny rules installed by the defense engine take precedence
            if (ctx.get(kContract, deny_key(requester.str(), resource, action_name(action))) ||
                ctx.get(kContract, "deny_all/" + requester.str())) {
                ctx.emit("AuthorizationDenied",
                         {{"did", requester.str()}, {"resource", resource}, {"reason", "deny policy"}});
                return;
            }

            Digest doc_hash = Digest::from_hex_str(rec.at("doc_hash").get<std::string>());
            json doc = json::parse(to_string(cas_ptr->get(ContentId{doc_hash})));

            AccessPolicy policy = policy_from_json_impl(json::parse(*raw));
            std::string failing;
            if (!policy.evaluate(doc, ctx.now(), env, &failing)) {
                ctx.emit("AuthorizationDenied",
                         {{"did", requester.str()}, {"resource", resource}, {"reason", failing}});
                return;
            }

            CapabilityToken token;
            token.holder = requester;
            token.action = action;
            token.resource = resource;
            token.expiry = LedgerTime::at(ctx.now().logical_timestamp + token_ttl);
            token.context_snapshot = environment_snapshot_hash(env);
            token.context_free = policy.context_free_tokens;
            Bytes signing = token_signing_bytes(token);
            token.issuer_signature = sign(acc_keys, BytesView(signing.data(), signing.size()));

            // usage metrics plus capability bindings for governance lookups
            auto count_raw = ctx.get(kContract, "usage/" + resource);
            uint64_t count = count_raw ? std::stoull(*count_raw) : 0;
            ctx.put(kContract, "usage/" + resource, std::to_string(count + 1));
            json bind_op{{"op", "record_binding"},
                         {"did", requester.str()},
                         {"binding", {{"resource", resource}, {"action", std::string(action_name(action))}}}};
            ctx.try_invoke(AgcNames::kContract, to_bytes(bind_op.dump()));

            ctx.emit("TokenIssued", {{"did", requester.str()},
                                     {"resource", resource},
                                     {"action", std::string(action_name(action))},
                                     {"expiry", std::to_string(token.expiry.block_height)},
                                     {"token", token_to_json(token).dump()}});
            return;
        }

        if (op == "deny") {
            if (!ctx.is_internal_call()) throw AuthError("deny rules are installed by the defense engine");
            std::string did = p.at("did").get<std::string>();
            if (p.contains("resource")) {
                ctx.put(kContract, deny_key(did, p.at("resource").get<std::string>(),
                                            p.at("action").get<std::string>()),
                        "1");
            } else {
                ctx.put(kContract, "deny_all/" + did, "1");
            }
            ctx.emit("PolicyDenyInstalled", {{"did", did}});
            return;
        }

        throw DispatchError("unknown acc op: " + op);
    });
}

AccessControl::AccessControl(DidRegistry& registry, KeyPair acc_keys, uint64_t token_ttl)
    : registry_(registry), acc_keys_(std::move(acc_keys)), token_ttl_(token_ttl) {
    install(registry.ledger(), registry.cas(), acc_keys_.public_key, acc_keys_.secret, token_ttl_);
}

void AccessControl::deploy_policy(const AccessPolicy& policy, const KeyPair& admin) {
    json payload{{"op", "deploy_policy"}, {"policy", policy_to_json_impl(policy)}};
    Receipt r = registry_.ledger().submit(kContract, to_bytes(payload.dump()), admin, "acc-admin");
    if (!r.ok) rethrow_receipt(r);
}

AuthorizationOutcome AccessControl::authorize(const Did& requester, Action action,
                                              const std::string& resource, const Environment& env,
                                              const KeyPair& submitter) {
    json payload{{"op", "authorize"},
                 {"did", requester.str()},
                 {"action", std::string(action_name(action))},
                 {"resource", resource},
                 {"environment", env}};
    Receipt r = registry_.ledger().submit(kContract, to_bytes(payload.dump()), submitter, requester.str());
    if (!r.ok) rethrow_receipt(r);
    AuthorizationOutcome out;
    for (const auto& ev : r.events) {
        if (ev.kind == "TokenIssued") {
            out.granted = true;
            out.token = token_from_json(json::parse(ev.attributes.at("token")));
        } else if (ev.kind == "AuthorizationDenied") {
            out.granted = false;
            out.denial_reason = ev.attributes.at("reason");
        }
    }
    return out;
}

bool AccessControl::verify_token(const CapabilityToken& token, LedgerTime now, const Environment& env) const {
    Bytes signing = token_signing_bytes(token);
    bool sig_ok = verify(Scheme::Standard, BytesView(acc_keys_.public_key.data(), acc_keys_.public_key.size()),
                         BytesView(signing.data(), signing.size()), token.issuer_signature);
    if (!sig_ok) return false;
    if (now.logical_timestamp >= token.expiry.logical_timestamp) return false;
    if (!token.context_free && environment_snapshot_hash(env) != token.context_snapshot) return false;

    // revocation rules installed after issuance still win
    const Ledger& ledger = registry_.ledger();
    if (ledger.state_get(kContract, "deny_all/" + token.holder.str())) return false;
    if (ledger.state_get(kContract, deny_key(token.holder.str(), token.resource, action_name(token.action))))
        return false;
    auto rec = DidRegistry::read_record(ledger, token.holder);
    if (!rec || rec->revocation_status) return false;
    return true;
}

}  // namespace blocka2a
