#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "msda/gradients.hpp"
#include "msda/kernels.hpp"
#include "msda/objective.hpp"
#include "msda/oscillator.hpp"
#include "msda/timeseries.hpp"

namespace msda {

struct LineSearchConfig {
  bool enabled = true;
  double factor = 0.5;
  int max_tries = 20;
};

enum class AmplitudePrior {
  mean_of_peaks,  // a_tilde = mean of the windowed peak amplitudes
  zero,           // a_tilde = 0, oscillations die out without data
};

enum Stage : std::size_t { kStage1a = 0, kStage1b, kStage2, kStageCount };

constexpr std::array<const char*, kStageCount> kStageNames = {"1a", "1b", "2"};

struct HyperConfig {
  // Time-scales. Zero means "derive from the estimated mean frequency".
  double T_s = 0.0;
  double T_l = 0.0;
  double epsilon = 0.1;
  double eta = 1.0;          // initial learning rate of every block
  double eta_growth = 2.0;   // applied after a step accepted on the first try
  LineSearchConfig line_search;
  std::array<int, kStageCount> max_iters = {200, 200, 2000};
  double tolerance = 1e-8;   // stop when |dL| < tolerance * (1 + |L|)
  int density_points = 201;
  double gap_threshold = 0.0;  // dashed reconstruction for longer gaps; 0 means T_s
  double initial_period = 120.0;  // provisional period for the first kernel pass
  std::optional<double> omega_tilde;  // bypasses the sign-change estimate
  AmplitudePrior amplitude_prior = AmplitudePrior::mean_of_peaks;
  double hysteresis = 0.25;  // sign-change band, fraction of std(y - b)
  std::array<Weights, kStageCount> weights = {
      Weights{0, 0, 1, 0, 0, 0, 0}, Weights{0, 0, 1, 1, 0, 0, 0}, Weights{1, 1, 1, 1, 1, 1, 1}};
};

struct BlockMask {
  bool x = false;
  bool z = false;
  bool params = false;
};

struct TraceRow {
  std::string stage;
  int iter = 0;
  double L = 0.0;
  Weights components{};
};

struct StageReport {
  std::vector<TraceRow> trace;
  int iterations = 0;
  int line_search_failures = 0;
  bool converged = false;
};

struct Initialization {
  EstimationState state;
  HyperConfig config;  // T_s and T_l filled in
  KickSeries kicks;    // rescaled to the final T_s
  KernelTables tables;
  EffectiveGaps gaps;
  double a_bar = 0.0;
  std::vector<double> peak_amplitude;  // a-hat
  std::vector<double> local_frequency; // omega-tilde^j from the sign changes
};

struct EstimationResult {
  EstimationState state;
  HyperConfig config;
  ObservationSeries obs;
  KickSeries kicks;
  KernelTables tables;
  EffectiveGaps gaps;
  double a_bar = 0.0;
  std::vector<TraceRow> trace;
  ObjectiveComponents final_components;
  std::array<int, kStageCount> iterations{};
  std::array<int, kStageCount> line_search_failures{};
  std::array<bool, kStageCount> converged{};
};

// Half-period local frequencies pi / P^j from the sign changes of y - b.
// Throws Errc::degenerate with fewer than two sign changes.
std::vector<double> sign_change_frequencies(const ObservationSeries& obs,
                                            std::span<const double> baseline, double hysteresis);

Initialization initialize(const ObservationSeries& obs, const KickSeries& kicks,
                          const HyperConfig& config);

// Gradient ascent over the unmasked blocks. Each of x, z, b, a, omega keeps
// its own step size, updated in turn; with line search the step is halved
// until L does not decrease.
StageReport run_stage(EstimationState& state, const ObservationSeries& obs,
                      const KernelTables& tables, const EffectiveGaps& gaps,
                      const WeightSchedule& schedule, BlockMask mask, int max_iters,
                      const HyperConfig& config, const std::string& stage_name = "");

EstimationResult estimate(const ObservationSeries& obs, const KickSeries& kicks,
                          const HyperConfig& config);

struct Reconstruction {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> radius;
  std::vector<bool> dashed;
};

Reconstruction reconstruct_trajectory(const EstimationResult& result,
                                      std::span<const double> grid);

// One-minute grid across the observation window.
std::vector<double> minute_grid(const ObservationSeries& obs);

// Time-weighted kernel density of `values` (attached to obs times) at at_time.
std::vector<double> density_estimate(std::span<const double> values,
                                     std::span<const double> times, double h, double T_l,
                                     const KickSeries& kicks, double at_time,
                                     std::span<const double> grid);

struct DensityTable {
  double at_time = 0.0;
  std::vector<double> grid;
  std::vector<double> rho_x;
  std::vector<double> rho_y;
};

// rho^x and rho^y on `points` values spanning the data +/- 4 h.
DensityTable density_table(std::span<const double> x, const ObservationSeries& obs, double h,
                           double T_l, const KickSeries& kicks, double at_time, int points);

}  // namespace msda
