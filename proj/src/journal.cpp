#include "blocka2a/journal.hpp"

#include <nlohmann/json.hpp>

#include "blocka2a/errors.hpp"

namespace blocka2a {

using nlohmann::json;

JournalWriter::JournalWriter(const std::string& path) : out_(path, std::ios::app) {
    if (!out_) throw IoError("cannot open journal file " + path);
}

void JournalWriter::append(const Transaction& tx, const Receipt& receipt) {
    json j;
    j["tx"] = {
        {"submitter", tx.submitter},
        {"contract", tx.target_contract},
        {"payload", to_hex(BytesView(tx.payload.data(), tx.payload.size()))},
        {"pubkey", to_hex(BytesView(tx.submitter_public_key.data(), tx.submitter_public_key.size()))},
        {"sig", to_hex(BytesView(tx.submitter_signature.bytes.data(), tx.submitter_signature.bytes.size()))},
        {"scheme", std::string(scheme_name(tx.submitter_signature.scheme))},
    };
    j["receipt"] = {{"ok", receipt.ok}, {"error", receipt.error}, {"height", receipt.time.block_height}};
    out_ << j.dump() << "\n";
    out_.flush();
}

std::vector<JournalRecord> journal_read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open journal file " + path);
    std::vector<JournalRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        JournalRecord rec;
        rec.tx.submitter = j["tx"]["submitter"].get<std::string>();
        rec.tx.target_contract = j["tx"]["contract"].get<std::string>();
        rec.tx.payload = from_hex(j["tx"]["payload"].get<std::string>());
        rec.tx.submitter_public_key = from_hex(j["tx"]["pubkey"].get<std::string>());
        rec.tx.submitter_signature.bytes = from_hex(j["tx"]["sig"].get<std::string>());
        rec.tx.submitter_signature.scheme = scheme_from_name(j["tx"]["scheme"].get<std::string>());
        rec.ok = j["receipt"]["ok"].get<bool>();
        rec.error = j["receipt"]["error"].get<std::string>();
        rec.height = j["receipt"]["height"].get<uint64_t>();
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<Receipt> journal_replay(const std::string& path, Ledger& fresh) {
    std::vector<Receipt> receipts;
    for (const auto& rec : journal_read(path)) {
        receipts.push_back(fresh.submit_transaction(rec.tx));
    }
    return receipts;
}

}  // namespace blocka2a
