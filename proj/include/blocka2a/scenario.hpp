#pragma once

#include "blocka2a/adapter.hpp"
#include "blocka2a/doe.hpp"

namespace blocka2a {

enum class AttackKind {
    Jailbreak,
    PromptInjection,
    PromptInfection,
    AiTM,
    FalseDataInjection,
    RecursiveBlocking,
    DarkPersonality,
    MalfunctionAmplification,
    TopologicalExploit,
    LatencyBypass,
};

enum class DefenseOutcome { Flagged, Halted, Revoked, Rejected, Throttled };

std::string_view attack_kind_name(AttackKind k);
AttackKind attack_kind_from_name(std::string_view s);
std::string_view defense_outcome_name(DefenseOutcome o);
DefenseOutcome defense_outcome_from_name(std::string_view s);

struct ScenarioScript {
    std::string name;
    AttackKind attack{AttackKind::PromptInjection};
    DefenseOutcome expected_defense{DefenseOutcome::Halted};
    size_t honest_agents{3};
    std::string malicious_agent{"mallory"};  // ground truth
    bool attack_enabled{true};
    uint64_t seed{42};
};

nlohmann::json script_to_json(const ScenarioScript& s);
ScenarioScript script_from_json(const nlohmann::json& j);
// One script per attack row, with the expected defense pinned.
std::vector<ScenarioScript> builtin_scripts();

struct ScenarioReport {
    std::string name;
    AttackKind attack;
    DefenseOutcome expected;
    bool attack_enabled{true};

    bool defense_fired{false};
    bool attribution_correct{false};
    std::string attributed_to;
    std::string detail;

    size_t alert_count{0};
    size_t halt_count{0};
    size_t revocation_count{0};

    uint64_t containment_ticks{0};
    double wall_ms{0.0};

    TrustEquivalenceReport trust;

    // attack runs need the defense to fire with correct attribution; honest
    // baselines must stay perfectly quiet
    bool passed() const {
        if (attack_enabled) return defense_fired && attribution_correct;
        return alert_count == 0 && halt_count == 0 && revocation_count == 0;
    }
};

nlohmann::json report_to_json(const ScenarioReport& r);

class ScenarioRunner {
  public:
    ScenarioReport run(const ScenarioScript& script);
};

}  // namespace blocka2a
