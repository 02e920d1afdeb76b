#include "fpc/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fpc/errors.hpp"
#include "fpc/parallel.hpp"
#include "fpc/rng.hpp"
#include "fpc/textio.hpp"

namespace fpc {

const std::vector<double>& default_grid_axis() {
    static const std::vector<double> axis = {1.2, 1.6, 2.0, 2.2, 2.6, 3.0,
                                             3.4, 3.8, 4.2, 4.4, 4.6, 5.0};
    return axis;
}

int default_c_max(const Dataset& data) {
    int c = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(data.n()))));
    c = std::max(c, 2);
    if (static_cast<std::size_t>(c) > data.n()) c = static_cast<int>(data.n());
    return c;
}

Matrix reconstruct_from_memberships(const Matrix& V, const Matrix& U) {
    std::size_t c = V.rows, d = V.cols, n = U.cols;
    Matrix x_hat(n, d);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < c; ++i) {
            double u = U(i, j);
            for (std::size_t k = 0; k < d; ++k) x_hat(j, k) += u * V(i, k);
        }
    return x_hat;
}

Matrix normalize_typicality(const Matrix& T) {
    Matrix out(T.rows, T.cols);
    for (std::size_t j = 0; j < T.cols; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < T.rows; ++i) sum += T(i, j);
        if (sum <= 0.0)
            throw NumericError("typicality column " + std::to_string(j) +
                               " has zero sum; cannot normalize");
        for (std::size_t i = 0; i < T.rows; ++i) out(i, j) = T(i, j) / sum;
    }
    return out;
}

Matrix reconstruct_from_typicalities(const Matrix& V, const Matrix& T_normalized) {
    return reconstruct_from_memberships(V, T_normalized);
}

double rmse(const Matrix& x, const Matrix& x_hat) {
    if (x.rows != x_hat.rows || x.cols != x_hat.cols)
        throw UsageError("rmse: shape mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < x.rows; ++j)
        s += squared_distance(x.row(j), x_hat.row(j));
    return std::sqrt(s / static_cast<double>(x.rows));
}

static void validate_axis(const std::vector<double>& values, const char* what) {
    if (values.empty()) throw UsageError(std::string(what) + " grid axis is empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 1.0))
            throw UsageError(std::string(what) + " grid values must be > 1");
        if (i > 0 && !(values[i] > values[i - 1]))
            throw UsageError(std::string(what) + " grid values must be strictly ascending");
    }
}

void validate_grid(const Dataset& data, const ParamGrid& grid) {
    validate_axis(grid.m_values, "m");
    validate_axis(grid.eta_values, "eta");
    if (grid.c_max < 2) throw UsageError("c_max must be at least 2");
    if (static_cast<std::size_t>(grid.c_max) > data.n())
        throw UsageError("c_max exceeds the number of data points");
}

CrmseSurface crmse_surface(const Dataset& data, const ParamGrid& grid,
                           const SolverConfig& solver, int threads,
                           bool allow_partial) {
    check_dataset(data);
    validate_grid(data, grid);

    std::size_t nm = grid.m_values.size(), ne = grid.eta_values.size();
    std::size_t nc = static_cast<std::size_t>(grid.c_max - 1);
    CrmseSurface surface;
    surface.grid = grid;
    surface.base_seed = solver.seed;
    surface.values = Matrix(nm, ne, std::numeric_limits<double>::quiet_NaN());
    surface.cell_errors.assign(nm * ne, "");
    surface.detail_rmse_u.assign(nm * ne * nc, std::numeric_limits<double>::quiet_NaN());
    surface.detail_rmse_t.assign(nm * ne * nc, std::numeric_limits<double>::quiet_NaN());

    std::vector<std::string> run_errors(nm * ne * nc, "");
    parallel_for(nm * ne * nc, threads, [&](std::size_t task) {
        std::size_t ci = task % nc;
        std::size_t cell = task / nc;
        std::size_t ei = cell % ne;
        std::size_t mi = cell / ne;
        double m = grid.m_values[mi];
        double eta = grid.eta_values[ei];
        int c = 2 + static_cast<int>(ci);

        SolverConfig cfg = solver;
        cfg.m = m;
        cfg.eta = eta;
        cfg.c = c;
        cfg.seed = derive_seed(solver.seed, {double_bits(m), double_bits(eta),
                                             static_cast<std::uint64_t>(c)});
        try {
            Partition p = run_fpcm(data, cfg);
            Matrix from_u = reconstruct_from_memberships(p.V, p.U);
            Matrix from_t = reconstruct_from_typicalities(p.V, normalize_typicality(p.T));
            surface.detail_rmse_u[task] = rmse(data.points, from_u);
            surface.detail_rmse_t[task] = rmse(data.points, from_t);
        } catch (const std::exception& e) {
            run_errors[task] = "c=" + std::to_string(c) + ": " + e.what();
        }
    });

    for (std::size_t mi = 0; mi < nm; ++mi)
        for (std::size_t ei = 0; ei < ne; ++ei) {
            std::size_t cell = surface.cell(mi, ei);
            double total = 0.0;
            for (std::size_t ci = 0; ci < nc; ++ci) {
                std::size_t task = cell * nc + ci;
                if (!run_errors[task].empty()) {
                    if (surface.cell_errors[cell].empty())
                        surface.cell_errors[cell] = run_errors[task];
                    total = std::numeric_limits<double>::quiet_NaN();
                } else {
                    total += surface.detail_rmse_u[task] + surface.detail_rmse_t[task];
                }
            }
            if (surface.cell_errors[cell].empty()) {
                surface.values(mi, ei) = total;
            } else {
                surface.partial = true;
                if (!allow_partial)
                    throw NumericError(
                        "CRMSE cell (m=" + format_double(grid.m_values[mi]) +
                        ", eta=" + format_double(grid.eta_values[ei]) + ") failed: " +
                        surface.cell_errors[cell] + " (rerun with --allow-partial to skip it)");
            }
        }
    return surface;
}

std::pair<double, double> select_params(const CrmseSurface& surface) {
    std::size_t nm = surface.grid.m_values.size(), ne = surface.grid.eta_values.size();
    bool found = false;
    double best = 0.0;
    std::size_t best_mi = 0, best_ei = 0;
    for (std::size_t mi = 0; mi < nm; ++mi)
        for (std::size_t ei = 0; ei < ne; ++ei) {
            double v = surface.values(mi, ei);
            if (!std::isfinite(v)) continue;
            if (!found || v < best) {
                best = v;
                best_mi = mi;
                best_ei = ei;
                found = true;
            }
        }
    if (!found) throw NumericError("CRMSE surface has no valid cells");
    return {surface.grid.m_values[best_mi], surface.grid.eta_values[best_ei]};
}

Algorithm1Result run_algorithm1(const Dataset& data, const ParamGrid& grid,
                                const SolverConfig& solver, int threads,
                                bool allow_partial, bool with_comparators) {
    Algorithm1Result result;
    result.surface = crmse_surface(data, grid, solver, threads, allow_partial);
    auto [m_star, eta_star] = select_params(result.surface);
    result.m_star = m_star;
    result.eta_star = eta_star;

    CurveOptions options;
    options.c_max = grid.c_max;
    options.m = m_star;
    options.eta = eta_star;
    options.solver = solver;
    options.threads = threads;
    options.with_comparators = with_comparators;
    result.curve = fp_curve(data, options);
    result.c_star = select_c(result.curve, "FP");
    return result;
}

}  // namespace fpc
