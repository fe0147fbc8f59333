#pragma once

// Shared test world: ledger + CAS + every contract facade, plus agent
// factories used across the unit and acceptance suites.

#include <nlohmann/json.hpp>

#include "blocka2a/contracts/acc.hpp"
#include "blocka2a/contracts/agc.hpp"
#include "blocka2a/contracts/ilc.hpp"
#include "blocka2a/cross_domain.hpp"
#include "blocka2a/doe.hpp"
#include "blocka2a/identity.hpp"
#include "blocka2a/provenance.hpp"

namespace blocka2a::testing {

inline Bytes seed_of(uint64_t n) {
    Bytes s(32, 0);
    for (int i = 0; i < 8; i++) s[i] = static_cast<uint8_t>(n >> (8 * i));
    return s;
}

struct TestAgent {
    std::string name;
    KeyPair msg_key;
    KeyPair agg_key;
    DidDocument doc;

    const Did& did() const { return doc.id; }
};

inline TestAgent make_agent(uint64_t seed, const std::string& name,
                            nlohmann::json capabilities = nlohmann::json::object()) {
    TestAgent a;
    a.name = name;
    a.msg_key = generate_keypair(Scheme::Standard, seed_of(seed));
    a.agg_key = generate_keypair(Scheme::Aggregatable, seed_of(seed + 1000000));
    Did did = generate_did(BytesView(a.msg_key.public_key.data(), a.msg_key.public_key.size()));
    a.doc.id = did;
    a.doc.public_keys.push_back({did.str() + "#key-1", Scheme::Standard, a.msg_key.public_key, {}});
    a.doc.public_keys.push_back(
        {did.str() + "#key-2", Scheme::Aggregatable, a.agg_key.public_key, prove_possession(a.agg_key)});
    a.doc.services.push_back({"AgentCommunicationEndpoint", "https://" + name + ".example.com/api"});
    if (capabilities.empty()) {
        capabilities = nlohmann::json{{"permissions", nlohmann::json::array({"read", "write", "invoke"})}};
    }
    a.doc.capabilities = capabilities;
    return a;
}

struct World {
    Ledger ledger;
    Cas cas;
    DidRegistry registry{ledger, cas};
    KeyPair admin = generate_keypair(Scheme::Standard, seed_of(0xad311));
    AgcGovernance agc{registry, admin};
    AccessControl acc{registry, generate_keypair(Scheme::Standard, seed_of(0xacc)), 300};
    WorkflowContracts ilc{registry};
    ProvenanceLedger provenance{registry};
    DefenseEngine doe{registry, agc, acc, ilc, provenance, admin, 0.95};

    TestAgent enroll(uint64_t seed, const std::string& name,
                     nlohmann::json capabilities = nlohmann::json::object()) {
        TestAgent a = make_agent(seed, name, std::move(capabilities));
        registry.register_did(a.doc, a.msg_key);
        return a;
    }

    Signature milestone_sig(const TestAgent& a, const Digest& task_hash, const std::string& milestone) {
        Bytes msg = milestone_signing_bytes(task_hash, milestone);
        return sign(a.agg_key, BytesView(msg.data(), msg.size()));
    }

    EventEndorsement ilc_endorsement(const TestAgent& a, const std::string& instance,
                                     const std::string& state, const std::string& event) {
        Bytes msg = ilc_event_signing_bytes(instance, state, event);
        return EventEndorsement{a.did(), sign(a.agg_key, BytesView(msg.data(), msg.size()))};
    }
};

}  // namespace blocka2a::testing
