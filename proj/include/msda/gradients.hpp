#pragma once

#include <cstddef>
#include <vector>

#include "msda/objective.hpp"

namespace msda {

struct GradientBundle {
  std::vector<double> d_x;
  std::vector<double> d_z;
  std::vector<double> d_b;
  std::vector<double> d_a;
  std::vector<double> d_omega;

  explicit GradientBundle(std::size_t n = 0)
      : d_x(n, 0.0), d_z(n, 0.0), d_b(n, 0.0), d_a(n, 0.0), d_omega(n, 0.0) {}
};

// Gradient of sum_k lambda_k L_k with respect to every descended variable.
// Throws Errc::numeric if a model term is active and some r^{j-1} falls
// below 1e-8 times the mean amplitude: the polar chain rule divides by r.
GradientBundle grad_total(const EstimationState& state, const ObservationSeries& obs,
                          const KernelTables& tables, const EffectiveGaps& gaps,
                          const WeightSchedule& schedule);

// L1 and L2 depend only on x. Returns (L1, L2) and adds
// lambda1 dL1/dx + lambda2 dL2/dx to d_x in one pass over the pairs. A term
// with zero weight is skipped (and reported as 0) unless all_values is set.
std::pair<double, double> data_terms_value_grad(std::span<const double> x,
                                                const ObservationSeries& obs,
                                                const KernelTables& tables, double epsilon,
                                                double lambda1, double lambda2,
                                                std::vector<double>& d_x,
                                                bool all_values = true);

// Adds the weighted gradients of L3, L4 and the parameter terms to `grad`.
void add_model_gradients(const EstimationState& state, const KernelTables& tables,
                         const EffectiveGaps& gaps, const WeightSchedule& schedule,
                         GradientBundle& grad);

// Largest coordinate-wise relative error between grad_total and central
// differences of eval_total; the denominator is max(|analytic|, |numeric|,
// 1e-12). The differences are taken with the objective evaluated in
// extended precision at step * max(|v|, rms of v's block).
double fd_check(const EstimationState& state, const ObservationSeries& obs,
                const KernelTables& tables, const EffectiveGaps& gaps,
                const WeightSchedule& schedule, double step);

}  // namespace msda
