#include "fpc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "fpc/errors.hpp"
#include "fpc/rng.hpp"
#include "fpc/textio.hpp"

namespace fpc {

void check_dataset(const Dataset& data) {
    if (data.n() < 1 || data.dim() < 1)
        throw DataError("dataset '" + data.name + "' is empty");
    for (double v : data.points.data)
        if (!std::isfinite(v))
            throw DataError("dataset '" + data.name + "' contains a non-finite value");
    if (data.true_c && (*data.true_c < 2 || static_cast<std::size_t>(*data.true_c) > data.n()))
        throw DataError("dataset '" + data.name + "' has out-of-range true_c");
    if (!data.labels.empty() && data.labels.size() != data.n())
        throw DataError("dataset '" + data.name + "' has a label count mismatch");
}

static std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return fields;
}

Dataset load_csv(const std::string& path, bool has_header,
                 std::optional<int> label_column, const std::string& name) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    Dataset data;
    data.name = name.empty() ? std::filesystem::path(path).stem().string() : name;

    std::string line;
    std::size_t row = 0;          // 1-based over data rows
    std::size_t width = 0;
    std::vector<double> values;
    bool header_pending = has_header;
    while (std::getline(in, line)) {
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        ++row;
        auto fields = split_csv_line(sv);
        if (width == 0) {
            width = fields.size();
            if (label_column && (*label_column < 0 || static_cast<std::size_t>(*label_column) >= width))
                throw DataError(path + ": label column " + std::to_string(*label_column) +
                                " out of range for " + std::to_string(width) + " columns");
        } else if (fields.size() != width) {
            throw DataError(path + ": row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(width));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (label_column && static_cast<std::size_t>(*label_column) == c) {
                data.labels.emplace_back(fields[c]);
                continue;
            }
            double v;
            try {
                v = parse_double(fields[c], "");
            } catch (const DataError&) {
                throw DataError(path + ": row " + std::to_string(row) + ": cannot parse '" +
                                std::string(fields[c]) + "' as a number");
            }
            if (!std::isfinite(v))
                throw DataError(path + ": row " + std::to_string(row) + ": non-finite value");
            values.push_back(v);
        }
    }
    if (row == 0) throw DataError(path + ": no data rows");

    data.points.rows = row;
    data.points.cols = label_column ? width - 1 : width;
    data.points.data = std::move(values);
    check_dataset(data);
    return data;
}

MixtureSpec load_mixture_spec(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
    MixtureSpec spec;
    try {
        spec.seed = doc.value("seed", std::uint64_t{0});
        for (const auto& comp : doc.at("components")) {
            MixtureComponent mc;
            mc.center = comp.at("center").get<std::vector<double>>();
            std::size_t d = mc.center.size();
            mc.count = comp.at("count").get<std::size_t>();
            mc.covariance = Matrix(d, d);
            if (comp.contains("covariance")) {
                auto rows = comp.at("covariance").get<std::vector<std::vector<double>>>();
                if (rows.size() != d)
                    throw DataError(path + ": covariance size does not match center dimension");
                for (std::size_t i = 0; i < d; ++i) {
                    if (rows[i].size() != d)
                        throw DataError(path + ": covariance is not square");
                    for (std::size_t j = 0; j < d; ++j) mc.covariance(i, j) = rows[i][j];
                }
            } else {
                double sigma = comp.value("sigma", 1.0);
                for (std::size_t i = 0; i < d; ++i) mc.covariance(i, i) = sigma * sigma;
            }
            spec.components.push_back(std::move(mc));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": bad mixture spec: " + e.what());
    }
    return spec;
}

// Lower-triangular Cholesky factor; rejects asymmetric or non-PD input.
static Matrix cholesky(const Matrix& a) {
    std::size_t d = a.rows;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            if (std::abs(a(i, j) - a(j, i)) > 1e-12)
                throw NumericError("covariance matrix is not symmetric");
    Matrix L(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            if (i == j) {
                if (s <= 0.0)
                    throw NumericError("covariance matrix is not positive-definite");
                L(i, i) = std::sqrt(s);
            } else {
                L(i, j) = s / L(j, j);
            }
        }
    }
    return L;
}

Dataset generate_mixture(const MixtureSpec& spec, const std::string& name) {
    if (spec.components.empty()) throw DataError("mixture spec has no components");
    std::size_t d = spec.components.front().center.size();
    std::size_t total = 0;
    for (const auto& comp : spec.components) {
        if (comp.center.size() != d)
            throw DataError("mixture components have mismatched dimensions");
        if (comp.covariance.rows != d || comp.covariance.cols != d)
            throw DataError("mixture covariance does not match center dimension");
        if (comp.count == 0) throw DataError("mixture component has count 0");
        total += comp.count;
    }
    if (total < 2) throw DataError("mixture must produce at least 2 points");

    Dataset data;
    data.name = name.empty() ? "mixture" : name;
    data.true_c = static_cast<int>(spec.components.size());
    data.points = Matrix(total, d);

    Rng rng(spec.seed);
    std::vector<double> z(d);
    std::size_t r = 0;
    for (const auto& comp : spec.components) {
        Matrix L = cholesky(comp.covariance);
        for (std::size_t s = 0; s < comp.count; ++s, ++r) {
            for (std::size_t k = 0; k < d; ++k) z[k] = rng.normal();
            for (std::size_t i = 0; i < d; ++i) {
                double v = comp.center[i];
                for (std::size_t k = 0; k <= i; ++k) v += L(i, k) * z[k];
                data.points(r, i) = v;
            }
        }
    }
    if (data.true_c && *data.true_c < 2) data.true_c.reset();
    check_dataset(data);
    return data;
}

std::vector<std::pair<double, double>> bounding_box(const Dataset& data) {
    std::vector<std::pair<double, double>> box(
        data.dim(), {std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity()});
    for (std::size_t j = 0; j < data.n(); ++j)
        for (std::size_t k = 0; k < data.dim(); ++k) {
            box[k].first = std::min(box[k].first, data.points(j, k));
            box[k].second = std::max(box[k].second, data.points(j, k));
        }
    return box;
}

Dataset add_uniform_noise(const Dataset& data, std::size_t count,
                          std::vector<std::pair<double, double>> bounds,
                          std::uint64_t seed) {
    check_dataset(data);
    if (count == 0) return data;
    if (bounds.empty()) bounds = bounding_box(data);
    if (bounds.size() != data.dim())
        throw DataError("noise bounds dimension does not match dataset");
    for (const auto& [lo, hi] : bounds)
        if (!(lo < hi)) throw DataError("degenerate noise bounds (need lo < hi)");

    Dataset out = data;
    out.points = Matrix(data.n() + count, data.dim());
    std::copy(data.points.data.begin(), data.points.data.end(), out.points.data.begin());
    if (!out.labels.empty()) out.labels.resize(out.points.rows, "noise");

    Rng rng(seed);
    for (std::size_t j = 0; j < count; ++j)
        for (std::size_t k = 0; k < data.dim(); ++k)
            out.points(data.n() + j, k) = rng.uniform(bounds[k].first, bounds[k].second);
    check_dataset(out);
    return out;
}

Dataset image_to_dataset(const Matrix& pixels, bool include_coords, double coord_weight) {
    if (pixels.rows == 0 || pixels.cols == 0) throw DataError("empty image");
    if (coord_weight < 0.0) throw DataError("coordinate weight must be nonnegative");
    Dataset data;
    data.name = "image";
    std::size_t h = pixels.rows, w = pixels.cols;
    std::size_t dim = include_coords ? 3 : 1;
    data.points = Matrix(h * w, dim);
    double rdiv = h > 1 ? static_cast<double>(h - 1) : 1.0;
    double cdiv = w > 1 ? static_cast<double>(w - 1) : 1.0;
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            std::size_t j = r * w + c;
            data.points(j, 0) = pixels(r, c);
            if (include_coords) {
                data.points(j, 1) = coord_weight * (static_cast<double>(r) / rdiv);
                data.points(j, 2) = coord_weight * (static_cast<double>(c) / cdiv);
            }
        }
    check_dataset(data);
    return data;
}

Dataset standardize(const Dataset& data) {
    check_dataset(data);
    Dataset out = data;
    std::size_t n = data.n(), d = data.dim();
    for (std::size_t k = 0; k < d; ++k) {
        double mean = 0.0;
        for (std::size_t j = 0; j < n; ++j) mean += data.points(j, k);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double dv = data.points(j, k) - mean;
            var += dv * dv;
        }
        var /= static_cast<double>(n);
        double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
        for (std::size_t j = 0; j < n; ++j)
            out.points(j, k) = (data.points(j, k) - mean) * scale;
    }
    check_dataset(out);
    return out;
}

void save_dataset(const Dataset& data, const std::string& csv_path,
                  const std::vector<std::pair<std::string, std::string>>& extra_meta) {
    check_dataset(data);
    std::ostringstream csv;
    for (std::size_t k = 0; k < data.dim(); ++k) {
        if (k) csv << ',';
        csv << 'x' << k;
    }
    if (!data.labels.empty()) csv << ",label";
    csv << '\n';
    for (std::size_t j = 0; j < data.n(); ++j) {
        for (std::size_t k = 0; k < data.dim(); ++k) {
            if (k) csv << ',';
            csv << format_double(data.points(j, k));
        }
        if (!data.labels.empty()) csv << ',' << data.labels[j];
        csv << '\n';
    }
    write_file_atomic(csv_path, csv.str());

    nlohmann::ordered_json meta;
    meta["name"] = data.name;
    meta["n"] = data.n();
    meta["dim"] = data.dim();
    if (data.true_c) meta["true_c"] = *data.true_c;
    meta["has_header"] = true;
    if (!data.labels.empty()) meta["label_column"] = data.dim();
    for (const auto& [key, value] : extra_meta) meta[key] = value;
    std::filesystem::path meta_path(csv_path);
    meta_path.replace_extension(".meta.json");
    write_file_atomic(meta_path.string(), meta.dump(2) + "\n");
}

}  // namespace fpc
