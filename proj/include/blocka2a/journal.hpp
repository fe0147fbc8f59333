#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "blocka2a/ledger.hpp"

namespace blocka2a {

// Newline-delimited journal: one JSON record per transaction holding the
// canonical serialized transaction and its receipt, enough to replay a run.
class JournalWriter {
  public:
    explicit JournalWriter(const std::string& path);
    void append(const Transaction& tx, const Receipt& receipt);

  private:
    std::ofstream out_;
};

struct JournalRecord {
    Transaction tx;
    bool ok{false};
    std::string error;
    uint64_t height{0};
};

std::vector<JournalRecord> journal_read(const std::string& path);

// Re-submits every journaled transaction against a fresh ledger (contracts
// must already be registered). Returns the receipts in order.
std::vector<Receipt> journal_replay(const std::string& path, Ledger& fresh);

}  // namespace blocka2a
