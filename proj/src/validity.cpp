#include "fpc/validity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fpc/errors.hpp"
#include "fpc/parallel.hpp"
#include "fpc/rng.hpp"

namespace fpc {

namespace {

constexpr double k_trace_epsilon = 1e-12;
constexpr double k_center_epsilon = 1e-12;
constexpr double k_log_clamp = 1e-15;
const double k_nan = std::numeric_limits<double>::quiet_NaN();

// t^eta + u^m point weight; an empty T (plain FCM partition) contributes u^m only.
double point_weight(const Matrix& U, const Matrix& T, std::size_t i, std::size_t j,
                    double m, double eta) {
    double w = std::pow(U(i, j), m);
    if (!T.empty()) w += std::pow(T(i, j), eta);
    return w;
}

std::vector<double> data_mean(const Dataset& data) {
    std::vector<double> mean(data.dim(), 0.0);
    for (std::size_t j = 0; j < data.n(); ++j)
        for (std::size_t k = 0; k < data.dim(); ++k) mean[k] += data.points(j, k);
    for (double& v : mean) v /= static_cast<double>(data.n());
    return mean;
}

std::vector<double> center_mean(const Matrix& V) {
    std::vector<double> mean(V.cols, 0.0);
    for (std::size_t i = 0; i < V.rows; ++i)
        for (std::size_t k = 0; k < V.cols; ++k) mean[k] += V(i, k);
    for (double& v : mean) v /= static_cast<double>(V.rows);
    return mean;
}

// Determinant by LU with partial pivoting; fine for the d <= tens here.
double det_lu(Matrix a) {
    std::size_t d = a.rows;
    double det = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
        std::size_t p = k;
        for (std::size_t r = k + 1; r < d; ++r)
            if (std::abs(a(r, k)) > std::abs(a(p, k))) p = r;
        if (a(p, k) == 0.0) return 0.0;
        if (p != k) {
            for (std::size_t c = 0; c < d; ++c) std::swap(a(p, c), a(k, c));
            det = -det;
        }
        det *= a(k, k);
        for (std::size_t r = k + 1; r < d; ++r) {
            double f = a(r, k) / a(k, k);
            for (std::size_t c = k; c < d; ++c) a(r, c) -= f * a(k, c);
        }
    }
    return det;
}

double clamped_entropy(const Matrix& U, std::size_t j) {
    double h = 0.0;
    for (std::size_t i = 0; i < U.rows; ++i)
        h -= U(i, j) * std::log(std::max(U(i, j), k_log_clamp));
    return h;
}

double min_center_gap_sq(const Matrix& V) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < V.rows; ++i)
        for (std::size_t k = i + 1; k < V.rows; ++k)
            best = std::min(best, squared_distance(V.row(i), V.row(k)));
    return best;
}

std::vector<std::size_t> hard_counts(const Matrix& U, const char* who) {
    std::vector<std::size_t> counts(U.rows, 0);
    for (std::size_t j : hard_assignment(U)) ++counts[j];
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (counts[i] == 0)
            throw NumericError(std::string(who) + ": cluster " + std::to_string(i) +
                               " wins no points under hard assignment");
    return counts;
}

}  // namespace

const std::vector<std::string>& index_names() {
    static const std::vector<std::string> names = {"FP", "PC",    "PE", "FS", "XB", "K",
                                                   "FHV", "PCAES", "W",  "SC", "ECAS"};
    return names;
}

bool index_maximizes(const std::string& index) {
    if (index == "FP" || index == "PC" || index == "PCAES" || index == "ECAS") return true;
    if (index == "PE" || index == "FS" || index == "XB" || index == "K" ||
        index == "FHV" || index == "W" || index == "SC")
        return false;
    throw UsageError("unknown validity index: " + index);
}

std::vector<std::size_t> hard_assignment(const Matrix& U) {
    std::vector<std::size_t> assign(U.cols, 0);
    for (std::size_t j = 0; j < U.cols; ++j) {
        std::size_t win = 0;
        for (std::size_t i = 1; i < U.rows; ++i)
            if (U(i, j) > U(win, j)) win = i;
        assign[j] = win;
    }
    return assign;
}

FpCovariance fp_covariance(const Dataset& data, const Partition& partition,
                           std::size_t i, double m, double eta) {
    std::size_t n = data.n(), d = data.dim();
    FpCovariance cov;
    cov.matrix = Matrix(d, d);
    double wsum = 0.0;
    std::vector<double> diff(d);
    for (std::size_t j = 0; j < n; ++j) {
        double w = point_weight(partition.U, partition.T, i, j, m, eta);
        wsum += w;
        for (std::size_t k = 0; k < d; ++k) diff[k] = data.points(j, k) - partition.V(i, k);
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b <= a; ++b) cov.matrix(a, b) += w * diff[a] * diff[b];
    }
    if (wsum <= 0.0)
        throw NumericError("cluster " + std::to_string(i) + " has zero total weight");
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b <= a; ++b) {
            cov.matrix(a, b) /= wsum;
            cov.matrix(b, a) = cov.matrix(a, b);
        }
    for (std::size_t a = 0; a < d; ++a) cov.trace += cov.matrix(a, a);
    return cov;
}

double fp_compactness(const Dataset& data, const Partition& partition, double m, double eta) {
    std::size_t c = partition.V.rows;
    double comp = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        FpCovariance cov = fp_covariance(data, partition, i, m, eta);
        if (cov.trace <= k_trace_epsilon)
            throw NumericError("cluster " + std::to_string(i) +
                               " has degenerate scatter (trace below 1e-12); compactness is undefined");
        double s = 0.0;
        for (std::size_t j = 0; j < data.n(); ++j)
            s += point_weight(partition.U, partition.T, i, j, m, eta) *
                 squared_distance(data.points.row(j), partition.V.row(i));
        comp += s / cov.trace;
    }
    return comp;
}

// Per cluster: W_i * exp(-(||v_i - vbar|| / min-gap_i)^m). Splitting a cluster
// drives its min gap toward zero and the exp factor toward zero, so the sum is
// largest when every center is well separated relative to its spread around
// the center mean.
double fp_separation(const Partition& partition, double m, double eta) {
    const Matrix& V = partition.V;
    std::size_t c = V.rows, n = partition.U.cols;
    if (c < 2) throw UsageError("separation needs at least 2 clusters");
    std::vector<double> vbar = center_mean(V);
    double sep = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        double spread = std::sqrt(squared_distance(V.row(i), {vbar.data(), vbar.size()}));
        if (spread <= k_center_epsilon)
            throw NumericError("cluster " + std::to_string(i) +
                               " sits on the center mean; separation is undefined");
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < c; ++k) {
            if (k == i) continue;
            gap = std::min(gap, std::sqrt(squared_distance(V.row(i), V.row(k))));
        }
        double w_i = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            w_i += point_weight(partition.U, partition.T, i, j, m, eta);
        sep += w_i * std::exp(-std::pow(spread / gap, m));
    }
    return sep;
}

double pc_index(const Matrix& U) {
    double s = 0.0;
    for (double u : U.data) s += u * u;
    return s / static_cast<double>(U.cols);
}

double pe_index(const Matrix& U) {
    double s = 0.0;
    for (double u : U.data) s -= u * std::log(std::max(u, k_log_clamp));
    return s / static_cast<double>(U.cols);
}

double fs_index(const Dataset& data, const Matrix& U, const Matrix& V, double m) {
    std::vector<double> vbar = center_mean(V);
    double s = 0.0;
    for (std::size_t i = 0; i < V.rows; ++i) {
        double vdist = squared_distance(V.row(i), {vbar.data(), vbar.size()});
        for (std::size_t j = 0; j < U.cols; ++j)
            s += std::pow(U(i, j), m) *
                 (squared_distance(data.points.row(j), V.row(i)) - vdist);
    }
    return s;
}

double xb_index(const Dataset& data, const Matrix& U, const Matrix& V, double m) {
    double num = 0.0;
    for (std::size_t i = 0; i < V.rows; ++i)
        for (std::size_t j = 0; j < U.cols; ++j)
            num += std::pow(U(i, j), m) * squared_distance(data.points.row(j), V.row(i));
    double gap = min_center_gap_sq(V);
    if (gap <= 0.0) throw NumericError("coincident centers: XB denominator is zero");
    return num / (static_cast<double>(U.cols) * gap);
}

double kwon_index(const Dataset& data, const Matrix& U, const Matrix& V) {
    std::vector<double> xbar = data_mean(data);
    double num = 0.0;
    for (std::size_t i = 0; i < V.rows; ++i)
        for (std::size_t j = 0; j < U.cols; ++j)
            num += U(i, j) * U(i, j) * squared_distance(data.points.row(j), V.row(i));
    double penalty = 0.0;
    for (std::size_t i = 0; i < V.rows; ++i)
        penalty += squared_distance(V.row(i), {xbar.data(), xbar.size()});
    num += penalty / static_cast<double>(V.rows);
    double gap = min_center_gap_sq(V);
    if (gap <= 0.0) throw NumericError("coincident centers: Kwon denominator is zero");
    return num / gap;
}

double fhv_index(const Dataset& data, const Matrix& U, const Matrix& V, double m) {
    Partition fuzzy_only;
    fuzzy_only.U = U;
    fuzzy_only.V = V;
    double s = 0.0;
    for (std::size_t i = 0; i < V.rows; ++i) {
        double det = det_lu(fp_covariance(data, fuzzy_only, i, m, 0.0).matrix);
        s += std::sqrt(std::max(det, 0.0));  // scatter is PSD; clip rounding noise
    }
    return s;
}

double pcaes_index(const Dataset& data, const Matrix& U, const Matrix& V) {
    std::size_t c = V.rows;
    double u_m = std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < U.cols; ++j) s += U(i, j) * U(i, j);
        u_m = std::min(u_m, s);
        total += s;
    }
    if (u_m <= 0.0) throw NumericError("PCAES: a cluster has zero total squared membership");
    std::vector<double> xbar = data_mean(data);
    double b_t = 0.0;
    for (std::size_t i = 0; i < c; ++i)
        b_t += squared_distance(V.row(i), {xbar.data(), xbar.size()});
    b_t /= static_cast<double>(c);
    if (b_t <= 0.0) throw NumericError("PCAES: all centers sit on the data mean");
    double sep = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < c; ++k) {
            if (k == i) continue;
            gap = std::min(gap, squared_distance(V.row(i), V.row(k)));
        }
        sep += std::exp(-gap / b_t);
    }
    return total / u_m - sep;
}

WPieces w_pieces(const Dataset& data, const Matrix& U, const Matrix& V) {
    std::size_t c = V.rows, n = U.cols;
    std::vector<std::size_t> counts = hard_counts(U, "W");
    double var = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            s += U(i, j) * squared_distance(data.points.row(j), V.row(i));
        var += s / static_cast<double>(counts[i]);
    }
    var *= std::sqrt((static_cast<double>(c) + 1.0) / (static_cast<double>(c) - 1.0));

    double overlap = 0.0;
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t k = i + 1; k < c; ++k)
            for (std::size_t j = 0; j < n; ++j)
                overlap = std::max(overlap, std::min(U(i, j), U(k, j)));
    return {var, 1.0 - overlap};
}

ScPieces sc_pieces(const Dataset& data, const Matrix& U, const Matrix& V) {
    std::size_t c = V.rows, n = U.cols;
    double comp = 0.0;
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < n; ++j)
            comp += U(i, j) * U(i, j) * squared_distance(data.points.row(j), V.row(i));

    std::vector<double> h(n);
    for (std::size_t j = 0; j < n; ++j) h[j] = clamped_entropy(U, j);
    double sep = 0.0;
    for (std::size_t p = 0; p < c; ++p)
        for (std::size_t q = 0; q < c; ++q) {
            if (p == q) continue;
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += std::min(U(p, j), U(q, j)) * h[j];
            sep += s;
        }
    sep *= 2.0 / (static_cast<double>(c) * (static_cast<double>(c) - 1.0));
    return {comp, sep};
}

EcasPieces ecas_pieces(const Dataset& data, const Matrix& U, const Matrix& V, double m) {
    std::size_t c = V.rows, n = U.cols;
    std::vector<double> xbar = data_mean(data);
    double scatter = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        scatter += squared_distance(data.points.row(j), {xbar.data(), xbar.size()});
    if (scatter <= 0.0) throw NumericError("ECAS: all data points coincide");
    std::vector<std::size_t> counts = hard_counts(U, "ECAS");

    double comp = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        double beta_comp = scatter / static_cast<double>(counts[i]);
        for (std::size_t j = 0; j < n; ++j)
            comp += std::pow(U(i, j), m) *
                    std::exp(-(squared_distance(data.points.row(j), V.row(i)) / beta_comp +
                               1.0 / (static_cast<double>(c) + 1.0)));
    }

    std::vector<double> vbar = center_mean(V);
    double beta_sep = 0.0;
    for (std::size_t b = 0; b < c; ++b)
        beta_sep += squared_distance(V.row(b), {vbar.data(), vbar.size()});
    beta_sep /= static_cast<double>(c);
    if (beta_sep <= 0.0) throw NumericError("ECAS: all centers coincide");

    double sep = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < c; ++k) {
            if (k == i) continue;
            gap = std::min(gap, squared_distance(V.row(i), V.row(k)));
        }
        sep += std::exp(-(static_cast<double>(c) - 1.0) * gap / beta_sep);
    }
    return {comp, sep};
}

namespace {

// Max over the finite entries; 0 when there are none.
double finite_max(const std::vector<double>& values) {
    double best = 0.0;
    bool seen = false;
    for (double v : values)
        if (std::isfinite(v) && (!seen || v > best)) {
            best = v;
            seen = true;
        }
    return seen ? best : 0.0;
}

void flag_missing(std::vector<double>& out, std::vector<std::string>& issues,
                  const std::string& message) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = k_nan;
        if (issues[i].empty()) issues[i] = message;
    }
}

}  // namespace

ValidityCurve fp_curve(const Dataset& data, const CurveOptions& options) {
    check_dataset(data);
    if (options.c_max < 2) throw UsageError("c_max must be at least 2");
    if (static_cast<std::size_t>(options.c_max) > data.n())
        throw UsageError("c_max exceeds the number of data points");
    if (!(options.m > 1.0) || !(options.eta > 1.0))
        throw UsageError("m and eta must be > 1");

    std::size_t count = static_cast<std::size_t>(options.c_max - 1);
    ValidityCurve curve;
    curve.m = options.m;
    curve.eta = options.eta;
    curve.c_values.resize(count);
    curve.comp_raw.assign(count, k_nan);
    curve.sep_raw.assign(count, k_nan);
    curve.comp_norm.assign(count, k_nan);
    curve.sep_norm.assign(count, k_nan);
    curve.v_fp.assign(count, k_nan);
    curve.partitions.resize(count);
    curve.seeds.resize(count);
    for (std::size_t idx = 0; idx < count; ++idx)
        curve.c_values[idx] = 2 + static_cast<int>(idx);

    std::vector<std::string> fatal(count);
    std::vector<double> w_var(count, k_nan), w_sep(count, k_nan);
    std::vector<double> sc_comp(count, k_nan), sc_sep(count, k_nan);
    std::vector<double> ec_comp(count, k_nan), ec_sep(count, k_nan);
    // Map entries are created up front and addressed through raw pointers so
    // the parallel workers never touch the maps themselves.
    std::vector<std::vector<double>*> vals(index_names().size(), nullptr);
    std::vector<std::vector<std::string>*> issues(index_names().size(), nullptr);
    if (options.with_comparators)
        for (std::size_t s = 1; s < index_names().size(); ++s) {  // skip FP
            const std::string& name = index_names()[s];
            curve.comparator_values[name].assign(count, k_nan);
            curve.comparator_issues[name].assign(count, "");
            vals[s] = &curve.comparator_values[name];
            issues[s] = &curve.comparator_issues[name];
        }
    auto slot = [](const char* name) {
        for (std::size_t s = 0; s < index_names().size(); ++s)
            if (index_names()[s] == name) return s;
        return std::size_t{0};
    };
    const std::size_t s_pc = slot("PC"), s_pe = slot("PE"), s_fs = slot("FS"),
                      s_xb = slot("XB"), s_k = slot("K"), s_fhv = slot("FHV"),
                      s_pcaes = slot("PCAES"), s_w = slot("W"), s_sc = slot("SC"),
                      s_ecas = slot("ECAS");

    parallel_for(count, options.threads, [&](std::size_t idx) {
        int c = curve.c_values[idx];
        SolverConfig cfg = options.solver;
        cfg.c = c;
        cfg.m = options.m;
        cfg.eta = options.eta;
        cfg.seed = derive_seed(options.solver.seed,
                               {double_bits(options.m), double_bits(options.eta),
                                static_cast<std::uint64_t>(c)});
        curve.seeds[idx] = cfg.seed;
        try {
            Partition p = run_fpcm(data, cfg);
            curve.comp_raw[idx] = fp_compactness(data, p, options.m, options.eta);
            curve.sep_raw[idx] = fp_separation(p, options.m, options.eta);
            curve.partitions[idx] = std::move(p);
        } catch (const std::exception& e) {
            fatal[idx] = e.what();
            return;
        }
        if (!options.with_comparators) return;

        const Partition& p = curve.partitions[idx];
        auto isolated = [&](std::size_t s, auto&& fn) {
            try {
                fn();
            } catch (const std::exception& e) {
                (*issues[s])[idx] = e.what();
            }
        };
        isolated(s_pc, [&] { (*vals[s_pc])[idx] = pc_index(p.U); });
        isolated(s_pe, [&] { (*vals[s_pe])[idx] = pe_index(p.U); });
        isolated(s_fs, [&] { (*vals[s_fs])[idx] = fs_index(data, p.U, p.V, options.m); });
        isolated(s_xb, [&] { (*vals[s_xb])[idx] = xb_index(data, p.U, p.V, options.m); });
        isolated(s_k, [&] { (*vals[s_k])[idx] = kwon_index(data, p.U, p.V); });
        isolated(s_fhv, [&] { (*vals[s_fhv])[idx] = fhv_index(data, p.U, p.V, options.m); });
        isolated(s_pcaes, [&] { (*vals[s_pcaes])[idx] = pcaes_index(data, p.U, p.V); });
        isolated(s_w, [&] {
            WPieces w = w_pieces(data, p.U, p.V);
            w_var[idx] = w.var;
            w_sep[idx] = w.sep;
        });
        isolated(s_sc, [&] {
            ScPieces sc = sc_pieces(data, p.U, p.V);
            sc_comp[idx] = sc.comp;
            sc_sep[idx] = sc.sep;
        });
        isolated(s_ecas, [&] {
            EcasPieces ec = ecas_pieces(data, p.U, p.V, options.m);
            ec_comp[idx] = ec.comp;
            ec_sep[idx] = ec.sep;
        });
    });

    for (std::size_t idx = 0; idx < count; ++idx)
        if (!fatal[idx].empty())
            throw NumericError("c=" + std::to_string(curve.c_values[idx]) + ": " + fatal[idx]);

    for (std::size_t idx = 0; idx < count; ++idx) {
        if (!std::isfinite(curve.comp_raw[idx]) || curve.comp_raw[idx] <= 0.0)
            throw NumericError("compactness at c=" + std::to_string(curve.c_values[idx]) +
                               " is not strictly positive");
        if (!std::isfinite(curve.sep_raw[idx]) || curve.sep_raw[idx] <= 0.0)
            throw NumericError("separation at c=" + std::to_string(curve.c_values[idx]) +
                               " is not strictly positive");
    }
    double comp_max = *std::max_element(curve.comp_raw.begin(), curve.comp_raw.end());
    double sep_max = *std::max_element(curve.sep_raw.begin(), curve.sep_raw.end());
    for (std::size_t idx = 0; idx < count; ++idx) {
        curve.comp_norm[idx] = curve.comp_raw[idx] / comp_max;
        curve.sep_norm[idx] = curve.sep_raw[idx] / sep_max;
        curve.v_fp[idx] = curve.comp_norm[idx] + curve.sep_norm[idx];
    }

    if (options.with_comparators) {
        // W, SC, and ECAS combine their per-c pieces with max-over-c
        // normalizers, so they are finalized only after every c is done.
        double var_max = finite_max(w_var), wsep_max = finite_max(w_sep);
        auto& w_vals = curve.comparator_values["W"];
        auto& w_issues = curve.comparator_issues["W"];
        if (var_max <= 0.0 || wsep_max <= 0.0) {
            flag_missing(w_vals, w_issues, "W: zero normalizer over the c-range");
        } else {
            for (std::size_t idx = 0; idx < count; ++idx) {
                if (!std::isfinite(w_var[idx])) continue;  // issue already recorded
                double value = (w_var[idx] / var_max) / (w_sep[idx] / wsep_max);
                if (std::isfinite(value))
                    w_vals[idx] = value;
                else if (w_issues[idx].empty())
                    w_issues[idx] = "W: non-finite after normalization";
            }
        }

        double sc_comp_max = finite_max(sc_comp), sc_sep_max = finite_max(sc_sep);
        auto& sc_vals = curve.comparator_values["SC"];
        auto& sc_issues = curve.comparator_issues["SC"];
        if (sc_comp_max <= 0.0 || sc_sep_max <= 0.0) {
            flag_missing(sc_vals, sc_issues, "SC: zero normalizer over the c-range");
        } else {
            for (std::size_t idx = 0; idx < count; ++idx) {
                if (!std::isfinite(sc_comp[idx])) continue;
                sc_vals[idx] = sc_sep[idx] / sc_sep_max + sc_comp[idx] / sc_comp_max;
            }
        }

        double ec_max = finite_max(ec_comp), es_max = finite_max(ec_sep);
        auto& ec_vals = curve.comparator_values["ECAS"];
        auto& ec_issues = curve.comparator_issues["ECAS"];
        if (ec_max <= 0.0 || es_max <= 0.0) {
            flag_missing(ec_vals, ec_issues, "ECAS: zero normalizer over the c-range");
        } else {
            for (std::size_t idx = 0; idx < count; ++idx) {
                if (!std::isfinite(ec_comp[idx])) continue;
                ec_vals[idx] = ec_comp[idx] / ec_max - ec_sep[idx] / es_max;
            }
        }
    }
    return curve;
}

int select_c(const ValidityCurve& curve, const std::string& index) {
    const std::vector<double>* values = nullptr;
    bool maximize = index_maximizes(index);  // also rejects unknown names
    if (index == "FP") {
        values = &curve.v_fp;
    } else {
        auto it = curve.comparator_values.find(index);
        if (it == curve.comparator_values.end())
            throw UsageError("index " + index + " was not computed for this curve");
        values = &it->second;
    }
    int best_c = 0;
    double best = 0.0;
    for (std::size_t idx = 0; idx < values->size(); ++idx) {
        double v = (*values)[idx];
        if (!std::isfinite(v)) continue;
        if (best_c == 0 || (maximize ? v > best : v < best)) {
            best = v;
            best_c = curve.c_values[idx];
        }
    }
    if (best_c == 0)
        throw NumericError("index " + index + " has no finite values over the c-range");
    return best_c;
}

}  // namespace fpc
