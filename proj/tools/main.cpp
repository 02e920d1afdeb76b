#include <algorithm>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpc/commands.hpp"
#include "fpc/errors.hpp"
#include "fpc/serialize.hpp"
#include "fpc/textio.hpp"
#include "fpc/version.hpp"

namespace {

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i)
        if (i == text.size() || text[i] == ',') {
            std::string token(fpc::trim(text.substr(start, i - start)));
            if (!token.empty()) out.push_back(std::move(token));
            start = i + 1;
        }
    return out;
}

std::vector<double> parse_grid(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const std::string& token : split_commas(text))
        out.push_back(fpc::parse_double(token, what));
    return out;
}

std::string config_token(const nlohmann::json& value) {
    if (value.is_string()) return value.get<std::string>();
    return value.dump();
}

// Expands every `--config FILE` into the flags the file mirrors, in place,
// so flags typed after the config still override its values.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config") {
            if (i + 1 == args.size()) throw fpc::UsageError("--config needs a file path");
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            out.push_back(args[i]);
            continue;
        }
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(fpc::read_file(path));
        } catch (const nlohmann::json::exception& e) {
            throw fpc::DataError(path + ": invalid JSON: " + e.what());
        }
        if (!doc.is_object())
            throw fpc::UsageError(path + ": config must be a JSON object of flag/value pairs");
        for (const auto& [key, value] : doc.items()) {
            std::string flag = "--" + key;
            if (value.is_boolean()) {
                if (value.get<bool>()) out.push_back(flag);
                continue;
            }
            if (value.is_array()) {
                std::string joined;
                for (const auto& item : value) {
                    if (!joined.empty()) joined += ',';
                    joined += config_token(item);
                }
                out.push_back(flag);
                out.push_back(joined);
                continue;
            }
            out.push_back(flag);
            out.push_back(config_token(value));
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fuzzy-possibilistic c-means clustering with FP validity analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", fpc::k_version);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    fpc::CommonOptions common;
    auto add_common = [&common](CLI::App* cmd) {
        cmd->add_option("--seed", common.seed, "base RNG seed (every sub-seed derives from it)");
        cmd->add_option("--threads", common.threads, "worker threads for grid/curve evaluation")
            ->check(CLI::Range(1, 512));
        cmd->add_flag("--standardize", common.standardize,
                      "center features and scale them to unit variance first");
        cmd->add_option("--out-dir", common.out_dir, "directory for output files");
        cmd->add_option("--format", common.format, "primary output format")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    bool header_yes = false, header_no = false;
    std::optional<int> label_column;
    auto add_dataset = [&](CLI::App* cmd, std::string& path, bool required) {
        CLI::Option* opt =
            cmd->add_option("dataset", path, "dataset CSV (a .meta.json sidecar is honored)");
        if (required) opt->required();
        CLI::Option* yes =
            cmd->add_flag("--has-header", header_yes, "the first CSV line is a header");
        CLI::Option* no =
            cmd->add_flag("--no-header", header_no, "every CSV line is a data row");
        yes->excludes(no);
        no->excludes(yes);
        cmd->add_option("--label-column", label_column,
                        "0-based label column, -1 for none; overrides the sidecar");
    };
    auto dataset_args = [&](const std::string& path) {
        fpc::DatasetArgs ds;
        ds.path = path;
        if (header_yes) ds.has_header = true;
        if (header_no) ds.has_header = false;
        ds.label_column = label_column;
        return ds;
    };

    std::string init_name = "kmeans++";
    auto add_solver = [&init_name](CLI::App* cmd, fpc::SolverConfig& solver) {
        cmd->add_option("--max-iter", solver.max_iter, "iteration cap")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--tol", solver.tol, "center-shift convergence threshold");
        cmd->add_option("--init", init_name, "center initialization")
            ->check(CLI::IsMember({"kmeans++", "random-points"}));
    };

    fpc::GenerateOptions gen;
    CLI::App* c_gen = app.add_subcommand("generate", "sample a dataset from a mixture spec");
    c_gen->add_option("spec", gen.spec_path, "mixture spec JSON")->required();
    c_gen->add_option("--out", gen.out_path, "output CSV path (default <out-dir>/<name>.csv)");
    add_common(c_gen);

    fpc::ClusterOptions cluster;
    std::string cluster_path;
    CLI::App* c_cluster = app.add_subcommand("cluster", "run FPCM once at a fixed c");
    add_dataset(c_cluster, cluster_path, true);
    c_cluster->add_option("-c,--clusters", cluster.solver.c, "number of clusters")->required();
    c_cluster->add_option("--m", cluster.solver.m, "fuzzifier");
    c_cluster->add_option("--eta", cluster.solver.eta, "typicality exponent");
    c_cluster->add_flag("--fcm", cluster.fcm, "plain fuzzy c-means (no typicalities)");
    c_cluster->add_option("--out-stem", cluster.out_stem,
                          "output stem (default <out-dir>/<name>.partition)");
    add_solver(c_cluster, cluster.solver);
    add_common(c_cluster);

    fpc::ValidateOptions validate;
    std::string validate_path;
    std::string indices_text;
    CLI::App* c_validate =
        app.add_subcommand("validate", "evaluate validity indices over c = 2..c_max");
    add_dataset(c_validate, validate_path, true);
    c_validate->add_option("--m", validate.m, "fuzzifier");
    c_validate->add_option("--eta", validate.eta, "typicality exponent");
    c_validate->add_option("--c-max", validate.c_max,
                           "largest candidate c (default ceil(sqrt(n)))");
    c_validate->add_option("--indices", indices_text,
                           "comma-separated index names to report (default all)");
    add_solver(c_validate, validate.solver);
    add_common(c_validate);

    fpc::TuneOptions tune;
    std::string tune_path;
    std::string m_grid_text, eta_grid_text;
    CLI::App* c_tune =
        app.add_subcommand("tune", "grid-search (m, eta) by CRMSE, then pick c by the FP index");
    add_dataset(c_tune, tune_path, false);
    c_tune->add_option("--m-grid", m_grid_text, "comma-separated m values");
    c_tune->add_option("--eta-grid", eta_grid_text, "comma-separated eta values");
    c_tune->add_option("--c-max", tune.c_max, "largest candidate c (default ceil(sqrt(n)))");
    c_tune->add_flag("--allow-partial", tune.allow_partial,
                     "skip grid cells whose solver fails instead of aborting");
    c_tune->add_option("--surface-fixture", tune.surface_fixture,
                       "replay parameter selection from a stored surface CSV");
    add_solver(c_tune, tune.solver);
    add_common(c_tune);

    fpc::SegmentOptions segment;
    CLI::App* c_segment = app.add_subcommand("segment", "cluster PGM pixels and write a mask");
    c_segment->add_option("image", segment.image_path, "grayscale PGM image")->required();
    c_segment->add_option("--mask", segment.mask_path,
                          "mask output path (default <out-dir>/<name>.mask.pgm)");
    c_segment->add_option("--m", segment.m, "fuzzifier");
    c_segment->add_option("--eta", segment.eta, "typicality exponent");
    c_segment->add_option("--c-max", segment.c_max, "largest candidate c");
    c_segment->add_flag("--include-coords", segment.include_coords,
                        "append scaled pixel coordinates to the feature vector");
    c_segment->add_option("--coord-weight", segment.coord_weight,
                          "weight of the coordinate features");
    add_solver(c_segment, segment.solver);
    add_common(c_segment);

    fpc::ReportOptions report;
    CLI::App* c_report = app.add_subcommand("report", "combine run reports into one table");
    c_report->add_option("reports", report.inputs, "report JSON files")
        ->expected(-1)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    c_report->add_option("--out", report.out_path,
                         "table output path (default <out-dir>/comparison.<format>)");
    add_common(c_report);

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = expand_config(args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const fpc::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const fpc::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }

    try {
        if (app.got_subcommand(c_gen)) {
            if (c_gen->count("--seed")) gen.seed_override = common.seed;
            fpc::cmd_generate(gen, common, std::cout, std::cerr);
        } else if (app.got_subcommand(c_cluster)) {
            cluster.dataset = dataset_args(cluster_path);
            cluster.solver.init = fpc::init_method_from_name(init_name);
            fpc::cmd_cluster(cluster, common, std::cout, std::cerr);
        } else if (app.got_subcommand(c_validate)) {
            validate.dataset = dataset_args(validate_path);
            validate.solver.init = fpc::init_method_from_name(init_name);
            validate.indices = split_commas(indices_text);
            fpc::cmd_validate(validate, common, std::cout, std::cerr);
        } else if (app.got_subcommand(c_tune)) {
            if (c_tune->count("dataset")) tune.dataset = dataset_args(tune_path);
            tune.solver.init = fpc::init_method_from_name(init_name);
            tune.m_values = parse_grid(m_grid_text, "--m-grid");
            tune.eta_values = parse_grid(eta_grid_text, "--eta-grid");
            fpc::cmd_tune(tune, common, std::cout, std::cerr);
        } else if (app.got_subcommand(c_segment)) {
            segment.solver.init = fpc::init_method_from_name(init_name);
            fpc::cmd_segment(segment, common, std::cout, std::cerr);
        } else if (app.got_subcommand(c_report)) {
            fpc::cmd_report(report, common, std::cout, std::cerr);
        }
        return 0;
    } catch (const fpc::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const fpc::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const fpc::NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 1;
    }
}
