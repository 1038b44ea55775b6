#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "msda/kernels.hpp"
#include "msda/oscillator.hpp"
#include "msda/timeseries.hpp"

namespace msda {

// The object descended: surrogate observations x, latent z and the flexed
// parameter trajectories, plus the fixed priors and noise scale.
struct EstimationState {
  std::vector<double> x;
  std::vector<double> z;
  ParamTrajectory params;
  ParamPriors priors;
  ModelNoise noise;

  std::size_t size() const { return x.size(); }
};

enum Component : std::size_t { kL1 = 0, kL2, kL3, kL4, kLb, kLa, kLomega, kComponentCount };

constexpr std::array<std::string_view, kComponentCount> kComponentNames = {
    "L1", "L2", "L3", "L4", "Lb", "La", "Lomega"};

using Weights = std::array<double, kComponentCount>;

struct WeightSchedule {
  Weights lambda{};
  double epsilon = 0.1;

  static WeightSchedule one_hot(Component c, double epsilon = 0.1) {
    WeightSchedule s;
    s.lambda[c] = 1.0;
    s.epsilon = epsilon;
    return s;
  }
  bool active(Component c) const { return lambda[c] != 0.0; }
};

struct ObjectiveComponents {
  Weights values{};

  double weighted(const Weights& lambda) const {
    double total = 0.0;
    for (std::size_t k = 0; k < kComponentCount; ++k) {
      if (lambda[k] != 0.0) total += lambda[k] * values[k];
    }
    return total;
  }
};

// Throws if the state's vectors do not all have length n or violate the
// parameter invariants.
void validate_state(const EstimationState& state, std::size_t n);

double eval_L1(const EstimationState& state, const ObservationSeries& obs,
               const KernelTables& tables, double epsilon);

double eval_L2(const EstimationState& state, const ObservationSeries& obs,
               const KernelTables& tables);

std::pair<double, double> eval_L3_L4(const EstimationState& state, const ObservationSeries& obs,
                                     const KernelTables& tables, const EffectiveGaps& gaps);

// (L_b, L_a, L_omega)
std::array<double, 3> eval_Lparams(const EstimationState& state, const KernelTables& tables,
                                   const EffectiveGaps& gaps);

// Components whose weight is zero are left at 0 and not evaluated.
ObjectiveComponents eval_components(const EstimationState& state, const ObservationSeries& obs,
                                    const KernelTables& tables, const EffectiveGaps& gaps,
                                    const WeightSchedule& schedule);

// Every component, regardless of weights.
ObjectiveComponents eval_all_components(const EstimationState& state,
                                        const ObservationSeries& obs, const KernelTables& tables,
                                        const EffectiveGaps& gaps, double epsilon);

double eval_total(const EstimationState& state, const ObservationSeries& obs,
                  const KernelTables& tables, const EffectiveGaps& gaps,
                  const WeightSchedule& schedule);

}  // namespace msda
