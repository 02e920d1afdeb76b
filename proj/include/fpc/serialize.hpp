#pragma once

#include <string>

#include <json.hpp>

#include "fpc/fpcm.hpp"
#include "fpc/matrix.hpp"
#include "fpc/tuning.hpp"
#include "fpc/validity.hpp"

namespace fpc {

std::string init_method_name(InitMethod init);
InitMethod init_method_from_name(const std::string& name);

nlohmann::ordered_json solver_config_to_json(const SolverConfig& config);
SolverConfig solver_config_from_json(const nlohmann::json& doc);

// Partition round-trips: every matrix entry is rendered in shortest
// round-trip decimal form, so load(save(p)) is bit-exact.
nlohmann::ordered_json partition_to_json(const Partition& partition,
                                         const SolverConfig& config);
Partition partition_from_json(const nlohmann::json& doc, SolverConfig* config_out = nullptr);
void save_partition_json(const Partition& partition, const SolverConfig& config,
                         const std::string& path);
Partition load_partition_json(const std::string& path, SolverConfig* config_out = nullptr);

// CSV trio <stem>.U.csv / <stem>.T.csv / <stem>.V.csv, each preceded by
// '#'-comment metadata lines recording the solver config and seed.
void save_partition_csv(const Partition& partition, const SolverConfig& config,
                        const std::string& stem);
Partition load_partition_csv(const std::string& stem, SolverConfig* config_out = nullptr);

// Validity curve exports.
std::string curve_long_csv(const ValidityCurve& curve);   // c,index,value rows
std::string curve_plot_csv(const ValidityCurve& curve);   // c,v_fp,comp_norm,sep_norm
nlohmann::ordered_json curve_summary_json(const ValidityCurve& curve);

// CRMSE surface: CSV matrix with eta rows and m columns (header row lists m).
std::string surface_csv(const CrmseSurface& surface);
CrmseSurface load_surface_csv(const std::string& path);
nlohmann::ordered_json surface_summary_json(const CrmseSurface& surface,
                                            double m_star, double eta_star);

}  // namespace fpc
