#include "fpc/report.hpp"

#include <algorithm>
#include <sstream>

#include "fpc/errors.hpp"
#include "fpc/serialize.hpp"
#include "fpc/textio.hpp"
#include "fpc/version.hpp"

namespace fpc {

nlohmann::ordered_json report_to_json(const RunReport& report) {
    nlohmann::ordered_json doc;
    doc["tool_version"] = report.tool_version;
    doc["command"] = report.command;
    doc["dataset"]["name"] = report.dataset_name;
    doc["dataset"]["n"] = report.n;
    doc["dataset"]["dim"] = report.dim;
    if (report.true_c)
        doc["dataset"]["true_c"] = *report.true_c;
    else
        doc["dataset"]["true_c"] = nullptr;
    if (!report.accepted_c.empty()) doc["dataset"]["accepted_c"] = report.accepted_c;
    doc["dataset"]["standardized"] = report.standardized;
    doc["params"]["m"] = report.m;
    doc["params"]["eta"] = report.eta;
    doc["params"]["c_max"] = report.c_max;
    doc["params"]["threads"] = report.threads;
    doc["solver"] = solver_config_to_json(report.solver);
    doc["selected_c"] = report.selected_c;
    if (!report.curve.is_null()) doc["curve"] = report.curve;
    if (!report.tuning.is_null()) doc["tuning"] = report.tuning;
    if (!report.output_files.empty()) doc["output_files"] = report.output_files;
    return doc;
}

RunReport report_from_json(const nlohmann::json& doc) {
    RunReport report;
    try {
        report.tool_version = doc.at("tool_version").get<std::string>();
        report.command = doc.at("command").get<std::string>();
        const auto& ds = doc.at("dataset");
        report.dataset_name = ds.at("name").get<std::string>();
        report.n = ds.at("n").get<std::size_t>();
        report.dim = ds.at("dim").get<std::size_t>();
        if (ds.contains("true_c") && !ds.at("true_c").is_null())
            report.true_c = ds.at("true_c").get<int>();
        if (ds.contains("accepted_c"))
            report.accepted_c = ds.at("accepted_c").get<std::vector<int>>();
        report.standardized = ds.value("standardized", false);
        const auto& params = doc.at("params");
        report.m = params.at("m").get<double>();
        report.eta = params.at("eta").get<double>();
        report.c_max = params.at("c_max").get<int>();
        report.threads = params.value("threads", 1);
        report.solver = solver_config_from_json(doc.at("solver"));
        report.selected_c = doc.at("selected_c");
        if (doc.contains("curve")) report.curve = doc.at("curve");
        if (doc.contains("tuning")) report.tuning = doc.at("tuning");
        if (doc.contains("output_files"))
            report.output_files = doc.at("output_files").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad report file: ") + e.what());
    }
    return report;
}

void save_report(const RunReport& report, const std::string& path) {
    write_file_atomic(path, report_to_json(report).dump(2) + "\n");
}

RunReport load_report(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
    try {
        return report_from_json(doc);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

void attach_curve(RunReport& report, const ValidityCurve& curve) {
    nlohmann::ordered_json summary = curve_summary_json(curve);
    report.selected_c = summary.at("selected_c");
    nlohmann::ordered_json doc = std::move(summary);
    nlohmann::ordered_json points = nlohmann::ordered_json::array();
    for (std::size_t idx = 0; idx < curve.c_values.size(); ++idx) {
        nlohmann::ordered_json row;
        row["c"] = curve.c_values[idx];
        row["seed"] = curve.seeds[idx];
        row["comp_raw"] = curve.comp_raw[idx];
        row["sep_raw"] = curve.sep_raw[idx];
        row["comp_norm"] = curve.comp_norm[idx];
        row["sep_norm"] = curve.sep_norm[idx];
        row["v_fp"] = curve.v_fp[idx];
        points.push_back(std::move(row));
    }
    doc["fp_points"] = std::move(points);
    report.curve = std::move(doc);
}

namespace {

// Cell text for one (report, index): selected c, '-' when absent, '*' suffix
// when it disagrees with true_c/accepted_c.
std::string table_cell(const RunReport& report, const std::string& index) {
    if (!report.selected_c.contains(index)) return "-";
    const auto& v = report.selected_c.at(index);
    if (v.is_null()) return "-";
    int c = v.get<int>();
    std::string text = std::to_string(c);
    if (report.true_c) {
        bool match = c == *report.true_c ||
                     std::find(report.accepted_c.begin(), report.accepted_c.end(), c) !=
                         report.accepted_c.end();
        if (!match) text += '*';
    }
    return text;
}

std::vector<std::string> table_columns(const std::vector<RunReport>& reports) {
    std::vector<std::string> columns;
    for (const std::string& name : index_names())
        for (const RunReport& r : reports)
            if (r.selected_c.contains(name)) {
                columns.push_back(name);
                break;
            }
    return columns;
}

}  // namespace

std::string report_table_csv(const std::vector<RunReport>& reports) {
    if (reports.empty()) throw UsageError("no report files to combine");
    std::vector<std::string> columns = table_columns(reports);
    std::ostringstream out;
    out << "dataset,n,dim,true_c";
    for (const std::string& name : columns) out << ',' << name;
    out << '\n';
    for (const RunReport& r : reports) {
        out << r.dataset_name << ',' << r.n << ',' << r.dim << ','
            << (r.true_c ? std::to_string(*r.true_c) : std::string("-"));
        for (const std::string& name : columns) out << ',' << table_cell(r, name);
        out << '\n';
    }
    return out.str();
}

std::string report_table_text(const std::vector<RunReport>& reports) {
    if (reports.empty()) throw UsageError("no report files to combine");
    std::vector<std::string> columns = table_columns(reports);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header = {"dataset", "true_c"};
    header.insert(header.end(), columns.begin(), columns.end());
    rows.push_back(header);
    for (const RunReport& r : reports) {
        std::vector<std::string> row = {
            r.dataset_name, r.true_c ? std::to_string(*r.true_c) : std::string("-")};
        for (const std::string& name : columns) row.push_back(table_cell(r, name));
        rows.push_back(std::move(row));
    }
    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& row : rows)
        for (std::size_t k = 0; k < row.size(); ++k)
            widths[k] = std::max(widths[k], row[k].size());
    std::ostringstream out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t k = 0; k < rows[r].size(); ++k) {
            if (k) out << "  ";
            out << rows[r][k];
            for (std::size_t pad = rows[r][k].size(); pad < widths[k]; ++pad) out << ' ';
        }
        out << '\n';
        if (r == 0) {
            for (std::size_t k = 0; k < widths.size(); ++k) {
                if (k) out << "  ";
                out << std::string(widths[k], '-');
            }
            out << '\n';
        }
    }
    out << "(* = disagrees with the dataset's known cluster count)\n";
    return out.str();
}

}  // namespace fpc
