#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fpc/dataset.hpp"
#include "fpc/fpcm.hpp"
#include "fpc/matrix.hpp"
#include "fpc/validity.hpp"

namespace fpc {

struct ParamGrid {
    std::vector<double> m_values;    // strictly ascending, all > 1
    std::vector<double> eta_values;  // likewise
    int c_max = 2;                   // evaluated cluster range is 2..c_max
};

// Axis values used when no explicit grid is given.
const std::vector<double>& default_grid_axis();

int default_c_max(const Dataset& data);  // ceil(sqrt(N)), clamped to [2, N]

struct CrmseSurface {
    ParamGrid grid;
    Matrix values;                        // m-index x eta-index; NaN = invalid cell
    std::vector<std::string> cell_errors; // per cell, "" when valid
    // Per-(cell, c) reconstruction errors, c ascending from 2; flat layout
    // (mi * |eta| + ei) * (c_max - 1) + (c - 2).
    std::vector<double> detail_rmse_u, detail_rmse_t;
    std::uint64_t base_seed = 0;
    bool partial = false;  // some cells failed (tolerated under allow_partial)

    std::size_t cell(std::size_t mi, std::size_t ei) const {
        return mi * grid.eta_values.size() + ei;
    }
};

struct Algorithm1Result {
    double m_star = 0.0, eta_star = 0.0;
    int c_star = 0;
    CrmseSurface surface;
    ValidityCurve curve;
};

// Predicted point j = sum_i u_ij * v_i (columns of U convex-combine centers).
Matrix reconstruct_from_memberships(const Matrix& V, const Matrix& U);

// Divides each column of T by its own sum so columns sum to 1.
Matrix normalize_typicality(const Matrix& T);

Matrix reconstruct_from_typicalities(const Matrix& V, const Matrix& T_normalized);

// sqrt(sum_j ||x_j - x_hat_j||^2 / N)
double rmse(const Matrix& x, const Matrix& x_hat);

void validate_grid(const Dataset& data, const ParamGrid& grid);

// Runs FPCM for every (m, eta, c) grid cell (independent derived seed per
// triple) and accumulates RMSE_U + RMSE_T over c into CRMSE(m, eta). A failed
// cell aborts unless allow_partial, in which case it is left NaN.
CrmseSurface crmse_surface(const Dataset& data, const ParamGrid& grid,
                           const SolverConfig& solver, int threads,
                           bool allow_partial);

// Global argmin of the surface; ties toward smaller m, then smaller eta.
std::pair<double, double> select_params(const CrmseSurface& surface);

// Full pipeline: CRMSE surface -> (m*, eta*) -> FP curve -> c*.
Algorithm1Result run_algorithm1(const Dataset& data, const ParamGrid& grid,
                                const SolverConfig& solver, int threads,
                                bool allow_partial, bool with_comparators);

}  // namespace fpc
