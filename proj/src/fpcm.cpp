#include "fpc/fpcm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fpc/errors.hpp"
#include "fpc/rng.hpp"

namespace fpc {

void validate_config(const Dataset& data, const SolverConfig& config) {
    if (config.c < 2) throw UsageError("cluster count must be at least 2");
    if (static_cast<std::size_t>(config.c) > data.n())
        throw UsageError("cluster count exceeds the number of data points");
    if (!(config.m > 1.0)) throw UsageError("fuzziness degree m must be > 1");
    if (!(config.eta > 1.0)) throw UsageError("typicality degree eta must be > 1");
    if (config.max_iter < 1) throw UsageError("max_iter must be positive");
    if (!(config.tol > 0.0)) throw UsageError("convergence tolerance must be positive");
    if (!(config.zero_dist_epsilon > 0.0))
        throw UsageError("zero-distance epsilon must be positive");
}

static bool rows_equal(const Matrix& points, std::size_t a, std::size_t b) {
    for (std::size_t k = 0; k < points.cols; ++k)
        if (points(a, k) != points(b, k)) return false;
    return true;
}

static Matrix init_random_points(const Dataset& data, int c, Rng& rng) {
    std::size_t n = data.n();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);

    std::vector<std::size_t> chosen;
    for (std::size_t idx : order) {
        bool duplicate = false;
        for (std::size_t prev : chosen)
            if (rows_equal(data.points, idx, prev)) {
                duplicate = true;
                break;
            }
        if (!duplicate) {
            chosen.push_back(idx);
            if (chosen.size() == static_cast<std::size_t>(c)) break;
        }
    }
    if (chosen.size() < static_cast<std::size_t>(c))
        throw NumericError("cannot place " + std::to_string(c) +
                           " centers: data has fewer distinct points");
    Matrix centers(static_cast<std::size_t>(c), data.dim());
    for (std::size_t i = 0; i < chosen.size(); ++i)
        std::copy_n(data.points.row(chosen[i]).data(), data.dim(), centers.row(i).data());
    return centers;
}

static Matrix init_kmeanspp(const Dataset& data, int c, Rng& rng) {
    std::size_t n = data.n(), d = data.dim();
    Matrix centers(static_cast<std::size_t>(c), d);
    std::size_t first = rng.below(n);
    std::copy_n(data.points.row(first).data(), d, centers.row(0).data());

    std::vector<double> best(n);
    for (std::size_t j = 0; j < n; ++j)
        best[j] = squared_distance(data.points.row(j), centers.row(0));

    for (int i = 1; i < c; ++i) {
        double total = std::accumulate(best.begin(), best.end(), 0.0);
        if (total <= 0.0)
            throw NumericError("cannot place " + std::to_string(c) +
                               " centers: data has fewer distinct points");
        double target = rng.uniform() * total;
        std::size_t pick = n - 1;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            acc += best[j];
            if (target < acc) {
                pick = j;
                break;
            }
        }
        std::copy_n(data.points.row(pick).data(), d, centers.row(static_cast<std::size_t>(i)).data());
        for (std::size_t j = 0; j < n; ++j)
            best[j] = std::min(best[j],
                               squared_distance(data.points.row(j),
                                                centers.row(static_cast<std::size_t>(i))));
    }
    return centers;
}

Matrix init_centers(const Dataset& data, const SolverConfig& config) {
    validate_config(data, config);
    Rng rng(config.seed);
    return config.init == InitMethod::KmeansPlusPlus
               ? init_kmeanspp(data, config.c, rng)
               : init_random_points(data, config.c, rng);
}

Matrix update_memberships(const Dataset& data, const Matrix& centers, double m,
                          double zero_dist_epsilon) {
    std::size_t n = data.n(), c = centers.rows;
    double eps2 = zero_dist_epsilon * zero_dist_epsilon;
    double exponent = 1.0 / (m - 1.0);
    Matrix U(c, n);
    std::vector<double> d2(c);
    for (std::size_t j = 0; j < n; ++j) {
        double d2min = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < c; ++i) {
            d2[i] = squared_distance(data.points.row(j), centers.row(i));
            d2min = std::min(d2min, d2[i]);
        }
        if (d2min <= eps2) {
            // Point sits on a center: crisp assignment to the nearest one.
            std::size_t win = 0;
            for (std::size_t i = 1; i < c; ++i)
                if (d2[i] < d2[win]) win = i;
            for (std::size_t i = 0; i < c; ++i) U(i, j) = i == win ? 1.0 : 0.0;
            continue;
        }
        // u_ij = (d_min/D_ij)^{2/(m-1)} normalized over i; identical to the
        // pairwise-ratio formula but immune to overflow for small distances.
        double sum = 0.0;
        for (std::size_t i = 0; i < c; ++i) {
            double w = std::pow(d2min / d2[i], exponent);
            U(i, j) = w;
            sum += w;
        }
        for (std::size_t i = 0; i < c; ++i) U(i, j) /= sum;
    }
    return U;
}

Matrix update_typicalities(const Dataset& data, const Matrix& centers, double eta,
                           double zero_dist_epsilon) {
    std::size_t n = data.n(), c = centers.rows;
    double eps2 = zero_dist_epsilon * zero_dist_epsilon;
    double exponent = 1.0 / (eta - 1.0);
    Matrix T(c, n);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < c; ++i) {
        double d2min = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            d2[j] = squared_distance(data.points.row(j), centers.row(i));
            d2min = std::min(d2min, d2[j]);
        }
        if (d2min <= eps2) {
            // Some point(s) sit on this center: split the row's unit mass
            // equally among them.
            std::size_t ties = 0;
            for (std::size_t j = 0; j < n; ++j)
                if (d2[j] <= eps2) ++ties;
            for (std::size_t j = 0; j < n; ++j)
                T(i, j) = d2[j] <= eps2 ? 1.0 / static_cast<double>(ties) : 0.0;
            continue;
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double w = std::pow(d2min / d2[j], exponent);
            T(i, j) = w;
            sum += w;
        }
        for (std::size_t j = 0; j < n; ++j) T(i, j) /= sum;
    }
    return T;
}

Matrix update_centers(const Dataset& data, const Matrix& U, const Matrix& T,
                      double m, double eta) {
    std::size_t n = data.n(), d = data.dim(), c = U.rows;
    bool with_t = !T.empty();
    Matrix V(c, d);
    for (std::size_t i = 0; i < c; ++i) {
        double wsum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double w = std::pow(U(i, j), m);
            if (with_t) w += std::pow(T(i, j), eta);
            wsum += w;
            for (std::size_t k = 0; k < d; ++k) V(i, k) += w * data.points(j, k);
        }
        if (wsum <= 0.0)
            throw NumericError("degenerate cluster " + std::to_string(i) +
                               ": all point weights are zero");
        for (std::size_t k = 0; k < d; ++k) V(i, k) /= wsum;
    }
    return V;
}

double fpcm_objective(const Dataset& data, const Matrix& U, const Matrix& T,
                      const Matrix& V, double m, double eta) {
    std::size_t n = data.n(), c = V.rows;
    bool with_t = !T.empty();
    double J = 0.0;
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double w = std::pow(U(i, j), m);
            if (with_t) w += std::pow(T(i, j), eta);
            J += w * squared_distance(data.points.row(j), V.row(i));
        }
    return J;
}

static Partition run_impl(const Dataset& data, const SolverConfig& config,
                          bool with_typicality, const IterationObserver& observer) {
    check_dataset(data);
    validate_config(data, config);

    Partition p;
    p.V = init_centers(data, config);
    for (int iter = 1; iter <= config.max_iter; ++iter) {
        p.U = update_memberships(data, p.V, config.m, config.zero_dist_epsilon);
        if (with_typicality)
            p.T = update_typicalities(data, p.V, config.eta, config.zero_dist_epsilon);
        Matrix V_next = update_centers(data, p.U, p.T, config.m, config.eta);
        double J = fpcm_objective(data, p.U, p.T, V_next, config.m, config.eta);
        if (!std::isfinite(J))
            throw NumericError("objective became non-finite at iteration " +
                               std::to_string(iter));
        for (double v : V_next.data)
            if (!std::isfinite(v))
                throw NumericError("centers became non-finite at iteration " +
                                   std::to_string(iter));
        double shift = 0.0;
        for (std::size_t k = 0; k < V_next.data.size(); ++k)
            shift = std::max(shift, std::abs(V_next.data[k] - p.V.data[k]));
        p.V = std::move(V_next);
        p.objective_trace.push_back(J);
        p.iterations = iter;
        if (observer) observer(iter, p.U, p.T, p.V, J);
        if (shift < config.tol) {
            p.converged = true;
            break;
        }
    }
    return p;
}

Partition run_fpcm(const Dataset& data, const SolverConfig& config,
                   const IterationObserver& observer) {
    return run_impl(data, config, true, observer);
}

Partition run_fcm(const Dataset& data, const SolverConfig& config,
                  const IterationObserver& observer) {
    return run_impl(data, config, false, observer);
}

}  // namespace fpc
