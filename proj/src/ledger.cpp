#include "blocka2a/ledger.hpp"

#include "blocka2a/errors.hpp"
#include "blocka2a/journal.hpp"
#include "blocka2a/merkle.hpp"

namespace blocka2a {

Bytes transaction_signing_bytes(const Transaction& tx) {
    Bytes buf;
    append_field(buf, tx.target_contract);
    append_field(buf, BytesView(tx.payload.data(), tx.payload.size()));
    return buf;
}

std::string address_of_key(BytesView standard_public_key) {
    Digest d = sha256(standard_public_key);
    return to_hex(BytesView(d.bytes.data(), 20));
}

// ---------------------------------------------------------------------------
// ContractContext
// ---------------------------------------------------------------------------

ContractContext::ContractContext(Ledger& host, const Transaction& tx, std::string contract,
                                 LedgerTime now)
    : host_(host), tx_(&tx), contract_(std::move(contract)), now_(now), active_payload_(&tx.payload) {}

std::optional<std::string> ContractContext::get(const std::string& ns, const std::string& key) const {
    auto wit = host_.pending_->writes.find(ns);
    if (wit != host_.pending_->writes.end()) {
        auto kit = wit->second.find(key);
        if (kit != wit->second.end()) return kit->second;  // nullopt encodes a pending erase
    }
    auto sit = host_.state_.find(ns);
    if (sit == host_.state_.end()) return std::nullopt;
    auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return std::nullopt;
    return kit->second;
}

void ContractContext::put(const std::string& ns, const std::string& key, std::string value) {
    host_.pending_->writes[ns][key] = std::move(value);
}

void ContractContext::erase(const std::string& ns, const std::string& key) {
    host_.pending_->writes[ns][key] = std::nullopt;
}

std::vector<std::pair<std::string, std::string>> ContractContext::entries(const std::string& ns) const {
    std::map<std::string, std::optional<std::string>> merged;
    auto sit = host_.state_.find(ns);
    if (sit != host_.state_.end()) {
        for (const auto& [k, v] : sit->second) merged[k] = v;
    }
    auto wit = host_.pending_->writes.find(ns);
    if (wit != host_.pending_->writes.end()) {
        for (const auto& [k, v] : wit->second) merged[k] = v;
    }
    std::vector<std::pair<std::string, std::string>> out;
    for (auto& [k, v] : merged) {
        if (v.has_value()) out.emplace_back(k, *v);
    }
    return out;
}

void ContractContext::emit(const std::string& kind, std::map<std::string, std::string> attributes) {
    LedgerEvent ev;
    ev.emitting_contract = contract_;
    ev.kind = kind;
    ev.attributes = std::move(attributes);
    ev.time = now_;
    ev.intra_block_index = static_cast<uint32_t>(host_.pending_->events.size());
    host_.pending_->events.push_back(std::move(ev));
}

std::string ContractContext::submitter_address() const {
    return address_of_key(BytesView(tx_->submitter_public_key.data(), tx_->submitter_public_key.size()));
}

void ContractContext::invoke(const std::string& contract, const Bytes& payload) {
    auto it = host_.contracts_.find(contract);
    if (it == host_.contracts_.end()) throw DispatchError("unknown contract: " + contract);
    ContractContext sub(host_, *tx_, contract, now_);
    sub.active_payload_ = &payload;
    sub.internal_call_ = true;
    it->second(sub);
}

bool ContractContext::try_invoke(const std::string& contract, const Bytes& payload) {
    if (!host_.contracts_.contains(contract)) return false;
    invoke(contract, payload);
    return true;
}

// ---------------------------------------------------------------------------
// Ledger
// ---------------------------------------------------------------------------

Ledger::Ledger(std::string chain_id) : chain_id_(std::move(chain_id)) {
    register_contract("sys", [](ContractContext&) {});
}

Ledger::~Ledger() = default;

void Ledger::register_contract(const std::string& name, ContractHandler handler) {
    std::unique_lock lock(mutex_);
    contracts_[name] = std::move(handler);
}

bool Ledger::has_contract(const std::string& name) const {
    std::shared_lock lock(mutex_);
    return contracts_.contains(name);
}

void Ledger::run_handler(ContractContext& ctx) {
    contracts_.at(ctx.contract())(ctx);
}

Receipt Ledger::submit_transaction(const Transaction& tx) {
    std::unique_lock lock(mutex_);
    Receipt r;

    auto fail = [&](const std::string& why) {
        r.ok = false;
        r.error = why;
        r.time = LedgerTime::at(height_);
        if (journal_) journal_->append(tx, r);
        return r;
    };

    if (tx.payload.size() > max_payload_bytes_) return fail("payload exceeds size cap");
    auto cit = contracts_.find(tx.target_contract);
    if (cit == contracts_.end()) return fail("dispatch error: unknown contract " + tx.target_contract);
    Bytes signing = transaction_signing_bytes(tx);
    bool sig_ok = false;
    try {
        sig_ok = verify(Scheme::Standard, BytesView(tx.submitter_public_key.data(), tx.submitter_public_key.size()),
                        BytesView(signing.data(), signing.size()), tx.submitter_signature);
    } catch (const SchemeError&) {
        sig_ok = false;
    }
    if (!sig_ok) return fail("auth error: invalid transaction signature");

    PendingBlock block;
    pending_ = &block;
    LedgerTime now = LedgerTime::at(height_ + 1);
    ContractContext ctx(*this, tx, tx.target_contract, now);
    try {
        cit->second(ctx);
    } catch (const std::exception& e) {
        pending_ = nullptr;
        return fail(e.what());
    }
    pending_ = nullptr;

    // commit
    height_ += 1;
    for (auto& [ns, kv] : block.writes) {
        for (auto& [k, v] : kv) {
            if (v.has_value()) {
                state_[ns][k] = std::move(*v);
            } else {
                auto sit = state_.find(ns);
                if (sit != state_.end()) sit->second.erase(k);
            }
        }
    }
    for (auto& ev : block.events) events_.push_back(ev);

    r.ok = true;
    r.time = now;
    r.events = std::move(block.events);
    if (journal_) journal_->append(tx, r);
    return r;
}

Receipt Ledger::submit(const std::string& contract, const Bytes& payload, const KeyPair& keys,
                       const std::string& submitter) {
    Transaction tx;
    tx.submitter = submitter;
    tx.target_contract = contract;
    tx.payload = payload;
    tx.submitter_public_key = keys.public_key;
    Bytes signing = transaction_signing_bytes(tx);
    tx.submitter_signature = sign(keys, BytesView(signing.data(), signing.size()));
    return submit_transaction(tx);
}

const KeyPair& Ledger::system_keys() const {
    if (!system_keys_) {
        Bytes seed(32, 0x5a);
        system_keys_ = std::make_unique<KeyPair>(generate_keypair(Scheme::Standard, BytesView(seed.data(), seed.size())));
    }
    return *system_keys_;
}

void Ledger::tick(uint64_t n) {
    for (uint64_t i = 0; i < n; i++) {
        Receipt r = submit("sys", Bytes{}, system_keys(), "system");
        if (!r.ok) throw std::logic_error("system tick failed: " + r.error);
    }
}

std::vector<LedgerEvent> Ledger::query_events(const EventFilter& filter) const {
    std::shared_lock lock(mutex_);
    std::vector<LedgerEvent> out;
    for (const auto& ev : events_) {
        if (filter.contract && ev.emitting_contract != *filter.contract) continue;
        if (filter.kind && ev.kind != *filter.kind) continue;
        if (filter.from_height && ev.time.block_height < *filter.from_height) continue;
        if (filter.to_height && ev.time.block_height > *filter.to_height) continue;
        out.push_back(ev);
    }
    return out;
}

LedgerTime Ledger::current_time() const {
    std::shared_lock lock(mutex_);
    return LedgerTime::at(height_);
}

std::optional<std::string> Ledger::state_get(const std::string& ns, const std::string& key) const {
    std::shared_lock lock(mutex_);
    auto sit = state_.find(ns);
    if (sit == state_.end()) return std::nullopt;
    auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return std::nullopt;
    return kit->second;
}

std::vector<std::pair<std::string, std::string>> Ledger::state_entries(const std::string& ns) const {
    std::shared_lock lock(mutex_);
    std::vector<std::pair<std::string, std::string>> out;
    auto sit = state_.find(ns);
    if (sit == state_.end()) return out;
    for (const auto& [k, v] : sit->second) out.emplace_back(k, v);
    return out;
}

Digest Ledger::state_root() const {
    std::shared_lock lock(mutex_);
    std::vector<Bytes> leaves;
    for (const auto& [ns, kv] : state_) {
        for (const auto& [k, v] : kv) {
            Bytes leaf;
            append_field(leaf, ns);
            append_field(leaf, k);
            append_field(leaf, v);
            leaves.push_back(std::move(leaf));
        }
    }
    return merkle_commit(leaves).commitment.root;
}

void Ledger::attach_journal(const std::string& path) {
    std::unique_lock lock(mutex_);
    journal_ = std::make_unique<JournalWriter>(path);
}

}  // namespace blocka2a
