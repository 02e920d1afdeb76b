#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fpc/dataset.hpp"
#include "fpc/fpcm.hpp"

namespace fpc {

// Flags shared by every subcommand. `out` below is the primary human-readable
// stream (stdout); `log` carries timings and progress (stderr) so primary
// outputs stay byte-identical across reruns.
struct CommonOptions {
    std::uint64_t seed = 42;
    int threads = 1;
    bool standardize = false;
    std::string out_dir = ".";
    std::string format = "csv";  // csv | json where a choice exists
};

// Loads a CSV dataset, honoring a  <stem>.meta.json sidecar when present
// (name, has_header, label_column, true_c, accepted_c); explicit arguments
// override the sidecar.
struct DatasetArgs {
    std::string path;
    std::optional<bool> has_header;
    std::optional<int> label_column;  // -1 = explicitly no label column
};
struct LoadedDataset {
    Dataset data;
    std::vector<int> accepted_c;
};
LoadedDataset load_dataset_with_meta(const DatasetArgs& args);

struct GenerateOptions {
    std::string spec_path;
    std::string out_path;  // CSV; sidecar written next to it
    std::optional<std::uint64_t> seed_override;
};
void cmd_generate(const GenerateOptions& options, const CommonOptions& common,
                  std::ostream& out, std::ostream& log);

struct ClusterOptions {
    DatasetArgs dataset;
    SolverConfig solver;  // c, m, eta, max_iter, tol, init, zero_dist_epsilon
    bool fcm = false;     // plain FCM instead of FPCM
    std::string out_stem;  // default: <out_dir>/<name>.partition
};
void cmd_cluster(const ClusterOptions& options, const CommonOptions& common,
                 std::ostream& out, std::ostream& log);

struct ValidateOptions {
    DatasetArgs dataset;
    double m = 2.0, eta = 2.0;
    int c_max = 0;  // 0 = default ceil(sqrt(N))
    std::vector<std::string> indices;  // empty = all
    SolverConfig solver;               // template (c/seed set per run)
};
void cmd_validate(const ValidateOptions& options, const CommonOptions& common,
                  std::ostream& out, std::ostream& log);

struct TuneOptions {
    std::optional<DatasetArgs> dataset;  // optional when replaying a fixture
    std::vector<double> m_values, eta_values;  // empty = default grid axis
    int c_max = 0;                             // 0 = default ceil(sqrt(N))
    bool allow_partial = false;
    std::string surface_fixture;  // replay: load this CSV instead of running
    SolverConfig solver;
};
void cmd_tune(const TuneOptions& options, const CommonOptions& common,
              std::ostream& out, std::ostream& log);

struct SegmentOptions {
    std::string image_path;
    std::string mask_path;  // default: <out_dir>/<name>.mask.pgm
    double m = 2.0, eta = 2.0;
    int c_max = 8;
    bool include_coords = false;
    double coord_weight = 0.0;
    SolverConfig solver;
};
void cmd_segment(const SegmentOptions& options, const CommonOptions& common,
                 std::ostream& out, std::ostream& log);

struct ReportOptions {
    std::vector<std::string> inputs;  // RunReport JSON files
    std::string out_path;             // default: <out_dir>/comparison.<format>
};
void cmd_report(const ReportOptions& options, const CommonOptions& common,
                std::ostream& out, std::ostream& log);

}  // namespace fpc
