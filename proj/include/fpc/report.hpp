#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpc/fpcm.hpp"
#include "fpc/validity.hpp"

namespace fpc {

// One run's results: everything needed to rebuild a comparison-table row.
// Deliberately contains no wall-clock data -- reports must be byte-identical
// across reruns with the same inputs and seeds (timings go to the log stream).
struct RunReport {
    std::string tool_version;
    std::string command;  // validate | tune | segment
    std::string dataset_name;
    std::size_t n = 0, dim = 0;
    std::optional<int> true_c;
    std::vector<int> accepted_c;  // additional counts treated as correct
    bool standardized = false;

    double m = 0.0, eta = 0.0;
    int c_max = 0;
    SolverConfig solver;  // template config (seed = base seed)
    int threads = 0;

    nlohmann::ordered_json selected_c;  // index name -> c (null when undefined)
    nlohmann::ordered_json curve;       // curve_summary_json + plot data
    nlohmann::ordered_json tuning;      // surface summary when command = tune

    std::vector<std::string> output_files;
};

nlohmann::ordered_json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& doc);
void save_report(const RunReport& report, const std::string& path);
RunReport load_report(const std::string& path);

// Fills selected_c and curve from a computed ValidityCurve.
void attach_curve(RunReport& report, const ValidityCurve& curve);

// Comparison table over several runs: one row per dataset, one column per
// index, selected c per cell; a '*' marks cells that disagree with the
// dataset's true_c (and any accepted_c alternates).
std::string report_table_csv(const std::vector<RunReport>& reports);
std::string report_table_text(const std::vector<RunReport>& reports);

}  // namespace fpc
