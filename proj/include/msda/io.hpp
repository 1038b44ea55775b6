#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "msda/optimizer.hpp"

namespace msda {

// Estimated states, header "t,x,z,b,a,omega".
struct StatesTable {
  std::vector<double> t, x, z, b, a, omega;
};

StatesTable states_table(const EstimationResult& result);
void save_states(const StatesTable& states, const std::filesystem::path& path);
StatesTable load_states(const std::filesystem::path& path);

// Header "t,value,dashed" with dashed as 0/1.
void save_reconstruction(const Reconstruction& rec, const std::filesystem::path& path);
Reconstruction load_reconstruction(const std::filesystem::path& path);

// Header "value,rho_x,rho_y".
void save_densities(const DensityTable& table, const std::filesystem::path& path);
DensityTable load_densities(const std::filesystem::path& path);

// Header "stage,iter,L,L1,L2,L3,L4,Lb,La,Lomega".
void save_objective_trace(const std::vector<TraceRow>& trace, const std::filesystem::path& path);
std::vector<TraceRow> load_objective_trace(const std::filesystem::path& path);

// JSON configuration:
//   {"hyper": {"T_s": .., "epsilon": .., "line_search": {"enabled": ..}, ...},
//    "weights": {"stage1a": [7 numbers], "stage1b": [...], "stage2": [...]}}
// Unknown keys are rejected so typos do not pass silently.
HyperConfig parse_config(std::string_view json_text, const HyperConfig& base = {});
std::string config_to_json(const HyperConfig& config);

// Summary of a finished run: resolved hyper-parameters, diagnostics, final components.
std::string run_summary_json(const EstimationResult& result);

// Writes states.csv, reconstruction.csv (one-minute grid), densities.csv at
// the midpoint of the window, trace.csv and run.json into `dir`.
void write_estimation_outputs(const EstimationResult& result, const std::filesystem::path& dir);

}  // namespace msda
