#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fpc/dataset.hpp"
#include "fpc/matrix.hpp"

namespace fpc {

enum class InitMethod { RandomPoints, KmeansPlusPlus };

struct SolverConfig {
    int c = 2;
    double m = 2.0;
    double eta = 2.0;
    int max_iter = 300;
    double tol = 1e-6;            // max absolute center displacement
    std::uint64_t seed = 0;
    InitMethod init = InitMethod::KmeansPlusPlus;
    double zero_dist_epsilon = 1e-12;
};

struct Partition {
    Matrix U;  // c x N memberships, columns sum to 1
    Matrix T;  // c x N typicalities, rows sum to 1 (empty for plain FCM)
    Matrix V;  // c x d centers
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;
};

// Called after each full update cycle; used for per-iteration diagnostics.
using IterationObserver =
    std::function<void(int iter, const Matrix& U, const Matrix& T, const Matrix& V, double J)>;

// Throws UsageError when the config violates its invariants for this dataset.
void validate_config(const Dataset& data, const SolverConfig& config);

// c distinct data rows; kmeans++ D^2 seeding or plain distinct sampling.
// Throws NumericError when the data has fewer than c distinct rows.
Matrix init_centers(const Dataset& data, const SolverConfig& config);

Matrix update_memberships(const Dataset& data, const Matrix& centers, double m,
                          double zero_dist_epsilon);

Matrix update_typicalities(const Dataset& data, const Matrix& centers, double eta,
                           double zero_dist_epsilon);

// Weighted mean with weights t^eta + u^m; pass an empty T for plain FCM
// (weights u^m alone). Throws NumericError on an all-zero weight row.
Matrix update_centers(const Dataset& data, const Matrix& U, const Matrix& T,
                      double m, double eta);

double fpcm_objective(const Dataset& data, const Matrix& U, const Matrix& T,
                      const Matrix& V, double m, double eta);

Partition run_fpcm(const Dataset& data, const SolverConfig& config,
                   const IterationObserver& observer = {});

// FCM for comparator parity: same loop without the typicality matrix.
Partition run_fcm(const Dataset& data, const SolverConfig& config,
                  const IterationObserver& observer = {});

}  // namespace fpc
