#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fpc/dataset.hpp"
#include "fpc/fpcm.hpp"
#include "fpc/matrix.hpp"

namespace fpc {

struct FpCovariance {
    Matrix matrix;  // d x d weighted scatter around the cluster center
    double trace = 0.0;
};

struct ValidityCurve {
    std::vector<int> c_values;  // 2..c_max
    std::vector<double> comp_raw, sep_raw;
    std::vector<double> comp_norm, sep_norm;  // raw / max-over-c
    std::vector<double> v_fp;                 // comp_norm + sep_norm
    // index name -> value per c; NaN where that index failed at that c
    std::map<std::string, std::vector<double>> comparator_values;
    // index name -> per-c diagnostic message ("" where the value is valid)
    std::map<std::string, std::vector<std::string>> comparator_issues;
    std::vector<Partition> partitions;    // FPCM partition per c
    std::vector<std::uint64_t> seeds;     // derived solver seed per c
    double m = 2.0, eta = 2.0;
    bool report_fp = true;  // include the FP rows when serializing
};

struct CurveOptions {
    int c_max = 2;  // evaluated range is 2..c_max inclusive
    double m = 2.0;
    double eta = 2.0;
    SolverConfig solver;  // template; c and seed are set per run
    int threads = 1;
    bool with_comparators = true;
};

// Canonical index names in report order; "FP" first.
const std::vector<std::string>& index_names();

// true for indices selected by argmax, false for argmin.
bool index_maximizes(const std::string& index);

FpCovariance fp_covariance(const Dataset& data, const Partition& partition,
                           std::size_t i, double m, double eta);

double fp_compactness(const Dataset& data, const Partition& partition, double m, double eta);

double fp_separation(const Partition& partition, double m, double eta);

// Hard assignment: cluster of maximum membership, ties to the lowest index.
std::vector<std::size_t> hard_assignment(const Matrix& U);

// Comparator index evaluations on one partition. W, SC, and ECAS come in
// raw pieces because their final values need a max-over-c normalization.
double pc_index(const Matrix& U);
double pe_index(const Matrix& U);
double fs_index(const Dataset& data, const Matrix& U, const Matrix& V, double m);
double xb_index(const Dataset& data, const Matrix& U, const Matrix& V, double m);
double kwon_index(const Dataset& data, const Matrix& U, const Matrix& V);
double fhv_index(const Dataset& data, const Matrix& U, const Matrix& V, double m);
double pcaes_index(const Dataset& data, const Matrix& U, const Matrix& V);

struct WPieces { double var = 0.0, sep = 0.0; };
WPieces w_pieces(const Dataset& data, const Matrix& U, const Matrix& V);

struct ScPieces { double comp = 0.0, sep = 0.0; };
ScPieces sc_pieces(const Dataset& data, const Matrix& U, const Matrix& V);

struct EcasPieces { double comp = 0.0, sep = 0.0; };
EcasPieces ecas_pieces(const Dataset& data, const Matrix& U, const Matrix& V, double m);

// Runs FPCM for every c in 2..c_max (seed derived per (m, eta, c)), computes
// the FP compactness/separation curve with its normalization pass, and -- when
// requested -- all comparator indices from the same partitions.
ValidityCurve fp_curve(const Dataset& data, const CurveOptions& options);

// Selected cluster count for the named index; ties go to the smallest c.
int select_c(const ValidityCurve& curve, const std::string& index);

}  // namespace fpc
