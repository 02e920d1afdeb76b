#include "fpc/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fpc/errors.hpp"
#include "fpc/pgm.hpp"
#include "fpc/report.hpp"
#include "fpc/rng.hpp"
#include "fpc/serialize.hpp"
#include "fpc/textio.hpp"
#include "fpc/tuning.hpp"
#include "fpc/validity.hpp"
#include "fpc/version.hpp"

namespace fpc {

namespace {

namespace fs = std::filesystem;

// Scoped wall-clock phase timer. Writes to the log stream only, never to a
// primary output file, so reports stay byte-identical across reruns.
class PhaseTimer {
public:
    PhaseTimer(std::ostream& log, std::string name)
        : log_(log), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
    ~PhaseTimer() {
        auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_);
        log_ << "timing: " << name_ << " " << elapsed.count() << "s\n";
    }

private:
    std::ostream& log_;
    std::string name_;
    std::chrono::steady_clock::time_point start_;
};

std::string out_file(const CommonOptions& common, const std::string& name) {
    return (fs::path(common.out_dir) / name).string();
}

nlohmann::json read_json_file(const std::string& path) {
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
}

RunReport base_report(const std::string& command, const Dataset& data,
                      const std::vector<int>& accepted_c, const CommonOptions& common,
                      const SolverConfig& solver) {
    RunReport report;
    report.tool_version = k_version;
    report.command = command;
    report.dataset_name = data.name;
    report.n = data.n();
    report.dim = data.dim();
    report.true_c = data.true_c;
    report.accepted_c = accepted_c;
    report.standardized = common.standardize;
    report.solver = solver;
    report.threads = common.threads;
    return report;
}

int resolve_c_max(int requested, const Dataset& data) {
    int c_max = requested > 0 ? requested : default_c_max(data);
    if (c_max < 3)
        throw UsageError("c_max must be at least 3 so the curve has at least two candidates");
    if (static_cast<std::size_t>(c_max) > data.n())
        throw UsageError("c_max exceeds the number of data points");
    return c_max;
}

// Restricts a computed curve to the requested index names (validates them).
ValidityCurve filter_indices(ValidityCurve curve, const std::vector<std::string>& wanted) {
    if (wanted.empty()) return curve;
    std::set<std::string> keep;
    for (const std::string& name : wanted) {
        index_maximizes(name);  // throws on unknown names
        keep.insert(name);
    }
    for (const std::string& name : index_names()) {
        if (name == "FP" || keep.count(name)) continue;
        curve.comparator_values.erase(name);
        curve.comparator_issues.erase(name);
    }
    curve.report_fp = keep.count("FP") > 0;
    return curve;
}

void print_selected(std::ostream& out, const ValidityCurve& curve) {
    for (const std::string& name : index_names()) {
        if (name == "FP" && !curve.report_fp) continue;
        if (name != "FP" && !curve.comparator_values.count(name)) continue;
        out << "  " << name << ": ";
        try {
            out << select_c(curve, name);
        } catch (const std::exception&) {
            out << "-";
        }
        out << '\n';
    }
}

}  // namespace

LoadedDataset load_dataset_with_meta(const DatasetArgs& args) {
    bool has_header = false;
    std::optional<int> label_column;
    std::string name;
    std::optional<int> true_c;
    std::vector<int> accepted_c;

    fs::path meta_path(args.path);
    meta_path.replace_extension(".meta.json");
    if (fs::exists(meta_path)) {
        nlohmann::json meta = read_json_file(meta_path.string());
        has_header = meta.value("has_header", false);
        if (meta.contains("label_column")) label_column = meta["label_column"].get<int>();
        name = meta.value("name", std::string());
        if (meta.contains("true_c") && !meta["true_c"].is_null())
            true_c = meta["true_c"].get<int>();
        if (meta.contains("accepted_c"))
            accepted_c = meta["accepted_c"].get<std::vector<int>>();
    }
    if (args.has_header) has_header = *args.has_header;
    if (args.label_column) label_column = *args.label_column >= 0
                                              ? std::optional<int>(*args.label_column)
                                              : std::nullopt;

    LoadedDataset loaded;
    loaded.data = load_csv(args.path, has_header, label_column, name);
    loaded.data.true_c = true_c;
    loaded.accepted_c = std::move(accepted_c);
    return loaded;
}

void cmd_generate(const GenerateOptions& options, const CommonOptions& common,
                  std::ostream& out, std::ostream& log) {
    PhaseTimer timer(log, "generate");
    nlohmann::json doc = read_json_file(options.spec_path);
    MixtureSpec spec = load_mixture_spec(options.spec_path);
    if (options.seed_override) spec.seed = *options.seed_override;

    std::string name = doc.value("name", fs::path(options.spec_path).stem().string());
    Dataset data = generate_mixture(spec, name);

    std::size_t noise_count = 0;
    if (doc.contains("noise")) {
        const auto& noise = doc.at("noise");
        noise_count = noise.value("count", std::size_t{0});
        std::vector<std::pair<double, double>> bounds;
        if (noise.contains("bounds"))
            for (const auto& b : noise.at("bounds"))
                bounds.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
        std::uint64_t noise_seed =
            noise.contains("seed") ? noise.at("seed").get<std::uint64_t>()
                                   : derive_seed(spec.seed, {noise_count});
        data = add_uniform_noise(data, noise_count, std::move(bounds), noise_seed);
    }

    std::string out_path = options.out_path.empty()
                               ? out_file(common, name + ".csv")
                               : options.out_path;
    std::vector<std::pair<std::string, std::string>> extra = {
        {"seed", std::to_string(spec.seed)},
        {"source_spec", options.spec_path},
        {"provenance", "generated gaussian mixture"}};
    if (noise_count)
        extra.emplace_back("noise_count", std::to_string(noise_count));
    save_dataset(data, out_path, extra);
    out << "generated " << data.name << ": n=" << data.n() << " dim=" << data.dim();
    if (data.true_c) out << " true_c=" << *data.true_c;
    out << " -> " << out_path << '\n';
}

void cmd_cluster(const ClusterOptions& options, const CommonOptions& common,
                 std::ostream& out, std::ostream& log) {
    PhaseTimer timer(log, "cluster");
    LoadedDataset loaded = load_dataset_with_meta(options.dataset);
    Dataset data = common.standardize ? standardize(loaded.data) : std::move(loaded.data);

    SolverConfig cfg = options.solver;
    cfg.seed = common.seed;
    Partition p = options.fcm ? run_fcm(data, cfg) : run_fpcm(data, cfg);

    std::string stem = options.out_stem.empty()
                           ? out_file(common, data.name + ".partition")
                           : options.out_stem;
    if (common.format == "json") {
        save_partition_json(p, cfg, stem + ".json");
        out << "partition -> " << stem << ".json\n";
    } else {
        save_partition_csv(p, cfg, stem);
        out << "partition -> " << stem << ".{U,T,V}.csv\n";
    }
    out << (options.fcm ? "fcm" : "fpcm") << " c=" << cfg.c << " iterations=" << p.iterations
        << " converged=" << (p.converged ? "yes" : "no")
        << " objective=" << format_double(p.objective_trace.back()) << '\n';
}

void cmd_validate(const ValidateOptions& options, const CommonOptions& common,
                  std::ostream& out, std::ostream& log) {
    PhaseTimer timer(log, "validate");
    LoadedDataset loaded = load_dataset_with_meta(options.dataset);
    Dataset data = common.standardize ? standardize(loaded.data) : std::move(loaded.data);

    CurveOptions curve_options;
    curve_options.c_max = resolve_c_max(options.c_max, data);
    curve_options.m = options.m;
    curve_options.eta = options.eta;
    curve_options.solver = options.solver;
    curve_options.solver.seed = common.seed;
    curve_options.threads = common.threads;
    ValidityCurve curve = filter_indices(fp_curve(data, curve_options), options.indices);

    std::string curve_path = out_file(common, data.name + ".curve.csv");
    std::string plot_path = out_file(common, data.name + ".plot.csv");
    std::string report_path = out_file(common, data.name + ".report.json");
    write_file_atomic(curve_path, curve_long_csv(curve));
    write_file_atomic(plot_path, curve_plot_csv(curve));

    RunReport report = base_report("validate", data, loaded.accepted_c, common,
                                   curve_options.solver);
    report.m = options.m;
    report.eta = options.eta;
    report.c_max = curve_options.c_max;
    attach_curve(report, curve);
    report.output_files = {fs::path(curve_path).filename().string(),
                           fs::path(plot_path).filename().string()};
    save_report(report, report_path);

    out << data.name << ": n=" << data.n() << " dim=" << data.dim()
        << " c-range=2.." << curve_options.c_max << " m=" << format_double(options.m)
        << " eta=" << format_double(options.eta) << '\n';
    out << "selected c per index:\n";
    print_selected(out, curve);
    out << "report -> " << report_path << '\n';
}

void cmd_tune(const TuneOptions& options, const CommonOptions& common,
              std::ostream& out, std::ostream& log) {
    PhaseTimer timer(log, "tune");

    // Fixture replay: run the selection rule on a stored surface.
    if (!options.surface_fixture.empty()) {
        CrmseSurface surface = load_surface_csv(options.surface_fixture);
        auto [m_star, eta_star] = select_params(surface);
        nlohmann::ordered_json summary = surface_summary_json(surface, m_star, eta_star);
        std::string stem = fs::path(options.surface_fixture).stem().string();
        std::string summary_path = out_file(common, stem + ".tuning.json");
        write_file_atomic(summary_path, summary.dump(2) + "\n");
        out << "surface " << options.surface_fixture << ": m*=" << format_double(m_star)
            << " eta*=" << format_double(eta_star)
            << " crmse=" << format_double(summary.at("crmse_min").get<double>()) << '\n';
        out << "summary -> " << summary_path << '\n';
        if (!options.dataset) return;
    }
    if (!options.dataset)
        throw UsageError("tune needs a dataset (or --surface-fixture to replay a stored surface)");

    LoadedDataset loaded = load_dataset_with_meta(*options.dataset);
    Dataset data = common.standardize ? standardize(loaded.data) : std::move(loaded.data);

    ParamGrid grid;
    grid.m_values = options.m_values.empty() ? default_grid_axis() : options.m_values;
    grid.eta_values = options.eta_values.empty() ? default_grid_axis() : options.eta_values;
    grid.c_max = resolve_c_max(options.c_max, data);

    SolverConfig solver = options.solver;
    solver.seed = common.seed;

    Algorithm1Result result;
    if (!options.surface_fixture.empty()) {
        // Fixture chose (m*, eta*); only the curve stage runs on the dataset.
        CrmseSurface surface = load_surface_csv(options.surface_fixture);
        auto [m_star, eta_star] = select_params(surface);
        result.surface = std::move(surface);
        result.m_star = m_star;
        result.eta_star = eta_star;
        CurveOptions curve_options;
        curve_options.c_max = grid.c_max;
        curve_options.m = m_star;
        curve_options.eta = eta_star;
        curve_options.solver = solver;
        curve_options.threads = common.threads;
        result.curve = fp_curve(data, curve_options);
        result.c_star = select_c(result.curve, "FP");
    } else {
        result = run_algorithm1(data, grid, solver, common.threads,
                                options.allow_partial, true);
    }

    std::string surface_path = out_file(common, data.name + ".crmse.csv");
    std::string tuning_path = out_file(common, data.name + ".tuning.json");
    std::string curve_path = out_file(common, data.name + ".curve.csv");
    std::string plot_path = out_file(common, data.name + ".plot.csv");
    std::string report_path = out_file(common, data.name + ".report.json");
    if (options.surface_fixture.empty())
        write_file_atomic(surface_path, surface_csv(result.surface));
    nlohmann::ordered_json tuning_summary =
        surface_summary_json(result.surface, result.m_star, result.eta_star);
    write_file_atomic(tuning_path, tuning_summary.dump(2) + "\n");
    write_file_atomic(curve_path, curve_long_csv(result.curve));
    write_file_atomic(plot_path, curve_plot_csv(result.curve));

    RunReport report = base_report("tune", data, loaded.accepted_c, common, solver);
    report.m = result.m_star;
    report.eta = result.eta_star;
    report.c_max = grid.c_max;
    attach_curve(report, result.curve);
    report.tuning = tuning_summary;
    report.output_files = {fs::path(tuning_path).filename().string(),
                           fs::path(curve_path).filename().string(),
                           fs::path(plot_path).filename().string()};
    if (options.surface_fixture.empty())
        report.output_files.insert(report.output_files.begin(),
                                   fs::path(surface_path).filename().string());
    save_report(report, report_path);

    out << data.name << ": m*=" << format_double(result.m_star)
        << " eta*=" << format_double(result.eta_star) << " c*=" << result.c_star << '\n';
    out << "selected c per index:\n";
    print_selected(out, result.curve);
    out << "report -> " << report_path << '\n';
}

void cmd_segment(const SegmentOptions& options, const CommonOptions& common,
                 std::ostream& out, std::ostream& log) {
    PhaseTimer timer(log, "segment");
    Matrix pixels = load_pgm(options.image_path);
    Dataset data = image_to_dataset(pixels, options.include_coords, options.coord_weight);
    data.name = fs::path(options.image_path).stem().string();
    if (common.standardize) data = standardize(data);

    CurveOptions curve_options;
    curve_options.c_max = resolve_c_max(options.c_max, data);
    curve_options.m = options.m;
    curve_options.eta = options.eta;
    curve_options.solver = options.solver;
    curve_options.solver.seed = common.seed;
    curve_options.threads = common.threads;

    ValidityCurve curve;
    try {
        curve = fp_curve(data, curve_options);
    } catch (const NumericError& e) {
        std::string msg = e.what();
        if (!options.include_coords)
            msg += " (hint: flat-intensity regions collapse to coincident points; "
                   "try --include-coords with a small --coord-weight)";
        throw NumericError(msg);
    }
    int c_star = select_c(curve, "FP");
    const Partition& partition = curve.partitions[static_cast<std::size_t>(c_star - 2)];
    std::vector<std::size_t> labels = hard_assignment(partition.U);

    Matrix mask(pixels.rows, pixels.cols);
    for (std::size_t j = 0; j < labels.size(); ++j)
        mask.data[j] = std::round(255.0 * static_cast<double>(labels[j]) /
                                  static_cast<double>(c_star - 1));
    std::string mask_path = options.mask_path.empty()
                                ? out_file(common, data.name + ".mask.pgm")
                                : options.mask_path;
    save_pgm(mask, mask_path);

    std::string report_path = out_file(common, data.name + ".report.json");
    RunReport report = base_report("segment", data, {}, common, curve_options.solver);
    report.m = options.m;
    report.eta = options.eta;
    report.c_max = curve_options.c_max;
    attach_curve(report, curve);
    report.output_files = {fs::path(mask_path).filename().string()};
    save_report(report, report_path);

    out << data.name << ": " << pixels.rows << "x" << pixels.cols
        << " image, selected c=" << c_star << '\n';
    out << "mask -> " << mask_path << '\n';
    out << "report -> " << report_path << '\n';
}

void cmd_report(const ReportOptions& options, const CommonOptions& common,
                std::ostream& out, std::ostream& log) {
    PhaseTimer timer(log, "report");
    if (options.inputs.empty()) throw UsageError("no report files given");
    std::vector<RunReport> reports;
    for (const std::string& path : options.inputs) reports.push_back(load_report(path));

    std::string out_path = options.out_path;
    if (common.format == "json") {
        if (out_path.empty()) out_path = out_file(common, "comparison.json");
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const RunReport& r : reports) {
            nlohmann::ordered_json row;
            row["dataset"] = r.dataset_name;
            row["n"] = r.n;
            row["dim"] = r.dim;
            if (r.true_c)
                row["true_c"] = *r.true_c;
            else
                row["true_c"] = nullptr;
            row["selected_c"] = r.selected_c;
            rows.push_back(std::move(row));
        }
        write_file_atomic(out_path, rows.dump(2) + "\n");
    } else {
        if (out_path.empty()) out_path = out_file(common, "comparison.csv");
        write_file_atomic(out_path, report_table_csv(reports));
    }
    out << report_table_text(reports);
    out << "table -> " << out_path << '\n';
}

}  // namespace fpc
