#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "blocka2a/digest.hpp"
#include "blocka2a/signature.hpp"

namespace blocka2a {

// Deterministic single-node ledger: one block per accepted transaction,
// logical_timestamp == block_height, no wall clock anywhere in state.
struct LedgerTime {
    uint64_t block_height{0};
    uint64_t logical_timestamp{0};

    auto operator<=>(const LedgerTime&) const = default;
    static LedgerTime at(uint64_t h) { return LedgerTime{h, h}; }
};

struct Transaction {
    std::string submitter;  // display identity (DID string or account address)
    std::string target_contract;
    Bytes payload;
    Bytes submitter_public_key;  // standard-scheme key; address derives from it
    Signature submitter_signature;  // covers (target_contract, payload)
};

Bytes transaction_signing_bytes(const Transaction& tx);
std::string address_of_key(BytesView standard_public_key);

struct LedgerEvent {
    std::string emitting_contract;
    std::string kind;
    std::map<std::string, std::string> attributes;
    LedgerTime time;
    uint32_t intra_block_index{0};
};

struct Receipt {
    bool ok{false};
    std::string error;  // empty on success
    LedgerTime time;    // block that committed the transaction
    std::vector<LedgerEvent> events;
};

struct EventFilter {
    std::optional<std::string> contract;
    std::optional<std::string> kind;
    std::optional<uint64_t> from_height;  // inclusive
    std::optional<uint64_t> to_height;    // inclusive
};

class Ledger;

// Execution view handed to a contract handler. All writes are buffered and
// either commit atomically or vanish when the handler throws.
class ContractContext {
  public:
    std::optional<std::string> get(const std::string& ns, const std::string& key) const;
    void put(const std::string& ns, const std::string& key, std::string value);
    void erase(const std::string& ns, const std::string& key);
    std::vector<std::pair<std::string, std::string>> entries(const std::string& ns) const;

    void emit(const std::string& kind, std::map<std::string, std::string> attributes);
    LedgerTime now() const { return now_; }
    const Transaction& tx() const { return *tx_; }
    const std::string& contract() const { return contract_; }
    std::string submitter_address() const;
    bool is_internal_call() const { return internal_call_; }

    // Synchronous cross-contract invocation inside the same atomic block.
    void invoke(const std::string& contract, const Bytes& payload);
    // Same, but a no-op returning false when the contract is absent.
    bool try_invoke(const std::string& contract, const Bytes& payload);

  private:
    friend class Ledger;
    ContractContext(Ledger& host, const Transaction& tx, std::string contract, LedgerTime now);

    Ledger& host_;
    const Transaction* tx_;
    std::string contract_;
    LedgerTime now_;
    const Bytes* active_payload_;
    bool internal_call_ = false;

  public:
    const Bytes& payload() const { return *active_payload_; }
};

using ContractHandler = std::function<void(ContractContext&)>;

class Ledger {
  public:
    explicit Ledger(std::string chain_id = "chain-local");
    ~Ledger();

    const std::string& chain_id() const { return chain_id_; }

    void register_contract(const std::string& name, ContractHandler handler);
    bool has_contract(const std::string& name) const;

    // Serialized through the single writer; atomic per transaction.
    Receipt submit_transaction(const Transaction& tx);

    // Convenience: build, sign with a standard-scheme key pair and submit.
    Receipt submit(const std::string& contract, const Bytes& payload, const KeyPair& keys,
                   const std::string& submitter);

    // Produce n empty blocks through the built-in system contract so logical
    // time can advance deterministically (journaled like any transaction).
    void tick(uint64_t n = 1);

    std::vector<LedgerEvent> query_events(const EventFilter& filter = {}) const;
    LedgerTime current_time() const;
    std::optional<std::string> state_get(const std::string& ns, const std::string& key) const;
    std::vector<std::pair<std::string, std::string>> state_entries(const std::string& ns) const;
    Digest state_root() const;

    void attach_journal(const std::string& path);
    size_t max_payload_bytes() const { return max_payload_bytes_; }

  private:
    friend class ContractContext;
    struct PendingBlock {
        std::map<std::string, std::map<std::string, std::optional<std::string>>> writes;
        std::vector<LedgerEvent> events;
    };

    void run_handler(ContractContext& ctx);
    const KeyPair& system_keys() const;

    std::string chain_id_;
    size_t max_payload_bytes_ = 1 << 20;
    mutable std::shared_mutex mutex_;
    std::map<std::string, ContractHandler> contracts_;
    std::map<std::string, std::map<std::string, std::string>> state_;
    std::vector<LedgerEvent> events_;
    uint64_t height_ = 0;
    PendingBlock* pending_ = nullptr;
    std::unique_ptr<class JournalWriter> journal_;
    mutable std::unique_ptr<KeyPair> system_keys_;
};

}  // namespace blocka2a
