#pragma once

#include "blocka2a/scenario.hpp"

namespace blocka2a {

enum class BenchSuite { CoreOps, DoeAlgorithms };

struct BenchRow {
    std::string category;
    std::string operation;
    double mean_ms{0.0};
    std::string op_type;  // "On chain" / "Off chain" / "On&Off chain"
    size_t runs{0};
};

struct BenchReport {
    std::string suite;
    std::vector<BenchRow> rows;
    size_t runs_per_row{0};
    std::string hardware_note;
};

// Measures the operation categories of the trust fabric (core_ops) and the
// three defense algorithms (doe_algorithms); every row averages >= 10 runs.
BenchReport run_bench(BenchSuite suite, size_t runs = 10);

std::string render_bench_table(const BenchReport& report);
nlohmann::json bench_report_to_json(const BenchReport& report);

}  // namespace blocka2a
