#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fpc/matrix.hpp"

namespace fpc {

struct Dataset {
    Matrix points;  // N x d
    std::string name;
    std::optional<int> true_c;            // known cluster count, for benchmarking only
    std::vector<std::string> labels;      // optional per-row labels, metadata only

    std::size_t n() const { return points.rows; }
    std::size_t dim() const { return points.cols; }
};

struct MixtureComponent {
    std::vector<double> center;
    Matrix covariance;  // d x d, symmetric positive-definite
    std::size_t count = 0;
};

struct MixtureSpec {
    std::vector<MixtureComponent> components;
    std::uint64_t seed = 0;
};

// Throws DataError if the dataset violates its own invariants (empty, or any
// non-finite feature value). Called by every producer below.
void check_dataset(const Dataset& data);

Dataset load_csv(const std::string& path, bool has_header,
                 std::optional<int> label_column, const std::string& name = "");

// Loads a MixtureSpec from a JSON file: {"seed": ..., "components":
// [{"center": [...], "covariance": [[...]] or "sigma": s, "count": n}, ...]}.
MixtureSpec load_mixture_spec(const std::string& path);

Dataset generate_mixture(const MixtureSpec& spec, const std::string& name = "");

// Appends `count` uniform points over the given per-dimension bounds; when
// `bounds` is empty the dataset's axis-aligned bounding box is used.
Dataset add_uniform_noise(const Dataset& data, std::size_t count,
                          std::vector<std::pair<double, double>> bounds,
                          std::uint64_t seed);

std::vector<std::pair<double, double>> bounding_box(const Dataset& data);

// One row per pixel, row-major. dim=1 (intensity) without coordinates, else
// dim=3 with (row, col) scaled to [0,1] and multiplied by coord_weight.
Dataset image_to_dataset(const Matrix& pixels, bool include_coords, double coord_weight);

// Maps each feature to zero mean, unit variance (constant features are left
// centered only).
Dataset standardize(const Dataset& data);

// Writes points as CSV (plus a .meta.json sidecar with name/true_c/extra
// provenance fields supplied by the caller).
void save_dataset(const Dataset& data, const std::string& csv_path,
                  const std::vector<std::pair<std::string, std::string>>& extra_meta = {});

}  // namespace fpc
