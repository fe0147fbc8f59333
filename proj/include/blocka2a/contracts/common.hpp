#pragma once

#include <nlohmann/json.hpp>
#include <optional>

#include "blocka2a/identity.hpp"

namespace blocka2a {

enum class Action { Read, Modify, Invoke, Delete };

std::string_view action_name(Action a);
Action action_from_name(std::string_view s);

enum class Comparator { Eq, Ne, Lt, Le, Gt, Ge, Contains };

std::string_view comparator_name(Comparator c);
Comparator comparator_from_name(std::string_view s);

// Ordered threat levels for environment predicates.
std::optional<int> threat_level_rank(const std::string& v);

// Generic three-way comparison used by policy clauses: threat levels by
// rank, numbers numerically, anything else lexicographically.
bool compare_values(const std::string& lhs, Comparator cmp, const std::string& rhs);

// Clause over a dotted path into a JSON document; unresolved paths are false.
struct JsonClause {
    std::string path;
    Comparator cmp{Comparator::Eq};
    nlohmann::json literal;

    bool evaluate(const nlohmann::json& doc) const;
};

JsonClause clause_from_json(const nlohmann::json& j);
nlohmann::json clause_to_json(const JsonClause& c);

// Turns an error receipt back into the typed exception its handler threw.
[[noreturn]] void rethrow_receipt(const Receipt& r);

}  // namespace blocka2a
