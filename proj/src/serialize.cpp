#include "fpc/serialize.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "fpc/errors.hpp"
#include "fpc/textio.hpp"

namespace fpc {

namespace {

const double k_nan = std::numeric_limits<double>::quiet_NaN();

std::string value_or_na(double v) { return std::isfinite(v) ? format_double(v) : "NA"; }

nlohmann::ordered_json matrix_to_json(const Matrix& m) {
    nlohmann::ordered_json doc;
    doc["rows"] = m.rows;
    doc["cols"] = m.cols;
    doc["data"] = m.data;
    return doc;
}

Matrix matrix_from_json(const nlohmann::json& doc) {
    Matrix m;
    m.rows = doc.at("rows").get<std::size_t>();
    m.cols = doc.at("cols").get<std::size_t>();
    m.data = doc.at("data").get<std::vector<double>>();
    if (m.data.size() != m.rows * m.cols)
        throw DataError("matrix data length does not match its dimensions");
    return m;
}

}  // namespace

std::string init_method_name(InitMethod init) {
    return init == InitMethod::KmeansPlusPlus ? "kmeans++" : "random-points";
}

InitMethod init_method_from_name(const std::string& name) {
    if (name == "kmeans++") return InitMethod::KmeansPlusPlus;
    if (name == "random-points") return InitMethod::RandomPoints;
    throw UsageError("unknown init method: " + name + " (use kmeans++ or random-points)");
}

nlohmann::ordered_json solver_config_to_json(const SolverConfig& config) {
    nlohmann::ordered_json doc;
    doc["c"] = config.c;
    doc["m"] = config.m;
    doc["eta"] = config.eta;
    doc["max_iter"] = config.max_iter;
    doc["tol"] = config.tol;
    doc["seed"] = config.seed;
    doc["init"] = init_method_name(config.init);
    doc["zero_dist_epsilon"] = config.zero_dist_epsilon;
    return doc;
}

SolverConfig solver_config_from_json(const nlohmann::json& doc) {
    SolverConfig config;
    config.c = doc.at("c").get<int>();
    config.m = doc.at("m").get<double>();
    config.eta = doc.at("eta").get<double>();
    config.max_iter = doc.at("max_iter").get<int>();
    config.tol = doc.at("tol").get<double>();
    config.seed = doc.at("seed").get<std::uint64_t>();
    config.init = init_method_from_name(doc.at("init").get<std::string>());
    config.zero_dist_epsilon = doc.at("zero_dist_epsilon").get<double>();
    return config;
}

nlohmann::ordered_json partition_to_json(const Partition& partition,
                                         const SolverConfig& config) {
    nlohmann::ordered_json doc;
    doc["config"] = solver_config_to_json(config);
    doc["U"] = matrix_to_json(partition.U);
    doc["T"] = matrix_to_json(partition.T);
    doc["V"] = matrix_to_json(partition.V);
    doc["objective_trace"] = partition.objective_trace;
    doc["iterations"] = partition.iterations;
    doc["converged"] = partition.converged;
    return doc;
}

Partition partition_from_json(const nlohmann::json& doc, SolverConfig* config_out) {
    Partition p;
    if (config_out) *config_out = solver_config_from_json(doc.at("config"));
    p.U = matrix_from_json(doc.at("U"));
    p.T = matrix_from_json(doc.at("T"));
    p.V = matrix_from_json(doc.at("V"));
    p.objective_trace = doc.at("objective_trace").get<std::vector<double>>();
    p.iterations = doc.at("iterations").get<int>();
    p.converged = doc.at("converged").get<bool>();
    return p;
}

void save_partition_json(const Partition& partition, const SolverConfig& config,
                         const std::string& path) {
    write_file_atomic(path, partition_to_json(partition, config).dump(2) + "\n");
}

Partition load_partition_json(const std::string& path, SolverConfig* config_out) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
    try {
        return partition_from_json(doc, config_out);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": bad partition file: " + e.what());
    }
}

namespace {

std::string config_comment(const SolverConfig& config) {
    std::ostringstream s;
    s << "# c=" << config.c << " m=" << format_double(config.m)
      << " eta=" << format_double(config.eta) << " max_iter=" << config.max_iter
      << " tol=" << format_double(config.tol) << " seed=" << config.seed
      << " init=" << init_method_name(config.init)
      << " zero_dist_epsilon=" << format_double(config.zero_dist_epsilon) << "\n";
    return s.str();
}

void save_matrix_csv(const Matrix& m, const SolverConfig& config, const std::string& path) {
    std::ostringstream out;
    out << config_comment(config);
    out << "# rows=" << m.rows << " cols=" << m.cols << "\n";
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) {
            if (c) out << ',';
            out << format_double(m(r, c));
        }
        out << '\n';
    }
    write_file_atomic(path, out.str());
}

Matrix load_matrix_csv(const std::string& path, std::string* config_line) {
    std::istringstream in(read_file(path));
    Matrix m;
    std::string line;
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        if (sv.front() == '#') {
            if (config_line && sv.find("c=") != std::string_view::npos && config_line->empty())
                *config_line = std::string(sv);
            continue;
        }
        ++rows;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= sv.size(); ++i)
            if (i == sv.size() || sv[i] == ',') {
                values.push_back(parse_double(trim(sv.substr(start, i - start)), path));
                start = i + 1;
            }
    }
    if (rows == 0) return m;  // empty matrix (e.g. plain-FCM T)
    if (values.size() % rows != 0) throw DataError(path + ": ragged matrix rows");
    m.rows = rows;
    m.cols = values.size() / rows;
    m.data = std::move(values);
    return m;
}

std::map<std::string, std::string> parse_comment_fields(const std::string& line) {
    std::map<std::string, std::string> fields;
    std::istringstream in(line);
    std::string token;
    while (in >> token) {
        std::size_t eq = token.find('=');
        if (eq != std::string::npos)
            fields[token.substr(0, eq)] = token.substr(eq + 1);
    }
    return fields;
}

}  // namespace

void save_partition_csv(const Partition& partition, const SolverConfig& config,
                        const std::string& stem) {
    save_matrix_csv(partition.U, config, stem + ".U.csv");
    save_matrix_csv(partition.T, config, stem + ".T.csv");
    save_matrix_csv(partition.V, config, stem + ".V.csv");
}

Partition load_partition_csv(const std::string& stem, SolverConfig* config_out) {
    Partition p;
    std::string config_line;
    p.U = load_matrix_csv(stem + ".U.csv", &config_line);
    p.T = load_matrix_csv(stem + ".T.csv", nullptr);
    p.V = load_matrix_csv(stem + ".V.csv", nullptr);
    if (config_out) {
        auto fields = parse_comment_fields(config_line);
        SolverConfig config;
        try {
            config.c = static_cast<int>(parse_double(fields.at("c"), "c"));
            config.m = parse_double(fields.at("m"), "m");
            config.eta = parse_double(fields.at("eta"), "eta");
            config.max_iter = static_cast<int>(parse_double(fields.at("max_iter"), "max_iter"));
            config.tol = parse_double(fields.at("tol"), "tol");
            config.seed = std::stoull(fields.at("seed"));
            config.init = init_method_from_name(fields.at("init"));
            config.zero_dist_epsilon =
                parse_double(fields.at("zero_dist_epsilon"), "zero_dist_epsilon");
        } catch (const std::out_of_range&) {
            throw DataError(stem + ".U.csv: missing config metadata header");
        }
        *config_out = config;
    }
    return p;
}

std::string curve_long_csv(const ValidityCurve& curve) {
    std::ostringstream out;
    out << "c,index,value\n";
    for (std::size_t idx = 0; idx < curve.c_values.size(); ++idx) {
        if (curve.report_fp)
            out << curve.c_values[idx] << ",FP," << value_or_na(curve.v_fp[idx]) << '\n';
        for (const std::string& name : index_names()) {
            if (name == "FP") continue;
            auto it = curve.comparator_values.find(name);
            if (it == curve.comparator_values.end()) continue;
            out << curve.c_values[idx] << ',' << name << ','
                << value_or_na(it->second[idx]) << '\n';
        }
    }
    return out.str();
}

std::string curve_plot_csv(const ValidityCurve& curve) {
    std::ostringstream out;
    out << "c,v_fp,comp_norm,sep_norm\n";
    for (std::size_t idx = 0; idx < curve.c_values.size(); ++idx)
        out << curve.c_values[idx] << ',' << value_or_na(curve.v_fp[idx]) << ','
            << value_or_na(curve.comp_norm[idx]) << ','
            << value_or_na(curve.sep_norm[idx]) << '\n';
    return out.str();
}

nlohmann::ordered_json curve_summary_json(const ValidityCurve& curve) {
    nlohmann::ordered_json doc;
    doc["m"] = curve.m;
    doc["eta"] = curve.eta;
    doc["c_range"] = {curve.c_values.front(), curve.c_values.back()};
    nlohmann::ordered_json selected;
    nlohmann::ordered_json issues = nlohmann::ordered_json::object();
    for (const std::string& name : index_names()) {
        if (name == "FP" && !curve.report_fp) continue;
        if (name != "FP" && !curve.comparator_values.count(name)) continue;
        try {
            selected[name] = select_c(curve, name);
        } catch (const std::exception& e) {
            selected[name] = nullptr;
            issues[name] = e.what();
        }
    }
    doc["selected_c"] = selected;
    for (const auto& [name, msgs] : curve.comparator_issues) {
        for (std::size_t idx = 0; idx < msgs.size(); ++idx)
            if (!msgs[idx].empty())
                issues[name + "@c=" + std::to_string(curve.c_values[idx])] = msgs[idx];
    }
    if (!issues.empty()) doc["issues"] = issues;
    return doc;
}

std::string surface_csv(const CrmseSurface& surface) {
    std::ostringstream out;
    out << "eta/m";
    for (double m : surface.grid.m_values) out << ',' << format_double(m);
    out << '\n';
    for (std::size_t ei = 0; ei < surface.grid.eta_values.size(); ++ei) {
        out << format_double(surface.grid.eta_values[ei]);
        for (std::size_t mi = 0; mi < surface.grid.m_values.size(); ++mi)
            out << ',' << value_or_na(surface.values(mi, ei));
        out << '\n';
    }
    return out.str();
}

CrmseSurface load_surface_csv(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= sv.size(); ++i)
            if (i == sv.size() || sv[i] == ',') {
                fields.emplace_back(trim(sv.substr(start, i - start)));
                start = i + 1;
            }
        rows.push_back(std::move(fields));
    }
    if (rows.size() < 2 || rows.front().size() < 2)
        throw DataError(path + ": surface CSV needs a header row and at least one data row");

    CrmseSurface surface;
    for (std::size_t k = 1; k < rows.front().size(); ++k)
        surface.grid.m_values.push_back(parse_double(rows.front()[k], "m header"));
    std::size_t nm = surface.grid.m_values.size();
    std::size_t ne = rows.size() - 1;
    surface.values = Matrix(nm, ne, k_nan);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != nm + 1)
            throw DataError(path + ": surface row " + std::to_string(r) +
                            " has the wrong number of columns");
        surface.grid.eta_values.push_back(parse_double(rows[r][0], "eta value"));
        for (std::size_t mi = 0; mi < nm; ++mi) {
            const std::string& cell = rows[r][mi + 1];
            if (cell == "NA") {
                surface.partial = true;
                continue;
            }
            surface.values(mi, r - 1) = parse_double(cell, "surface cell");
        }
    }
    surface.cell_errors.assign(nm * ne, "");
    return surface;
}

nlohmann::ordered_json surface_summary_json(const CrmseSurface& surface,
                                            double m_star, double eta_star) {
    nlohmann::ordered_json doc;
    doc["m_star"] = m_star;
    doc["eta_star"] = eta_star;
    double crmse_min = k_nan;
    for (std::size_t mi = 0; mi < surface.grid.m_values.size(); ++mi)
        for (std::size_t ei = 0; ei < surface.grid.eta_values.size(); ++ei)
            if (surface.grid.m_values[mi] == m_star &&
                surface.grid.eta_values[ei] == eta_star)
                crmse_min = surface.values(mi, ei);
    doc["crmse_min"] = crmse_min;
    doc["grid"]["m_values"] = surface.grid.m_values;
    doc["grid"]["eta_values"] = surface.grid.eta_values;
    doc["grid"]["c_max"] = surface.grid.c_max;
    doc["base_seed"] = surface.base_seed;
    doc["partial"] = surface.partial;
    return doc;
}

}  // namespace fpc
