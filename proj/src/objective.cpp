#include "msda/objective.hpp"

#include <cmath>
#include <string>

#include "msda/error.hpp"
#include "objective_terms.hpp"

namespace msda {

namespace {

detail::StateView<double> view(const EstimationState& s) {
  return {s.x, s.z, s.params.b, s.params.a, s.params.omega};
}

void check_tables(const ObservationSeries& obs, const KernelTables& tables, const char* op) {
  if (tables.n != obs.size()) {
    throw Error(Errc::invalid_argument, op, "tables were built for a different series");
  }
}

}  // namespace

void validate_state(const EstimationState& state, std::size_t n) {
  constexpr const char* op = "estimation_state";
  const auto check = [&](const std::vector<double>& v, const char* name) {
    if (v.size() != n) {
      throw Error(Errc::invalid_argument, op,
                  std::string(name) + " has length " + std::to_string(v.size()) + ", expected " +
                      std::to_string(n));
    }
    for (const double e : v) {
      if (!std::isfinite(e)) throw Error(Errc::numeric, op, std::string(name) + " is not finite");
    }
  };
  check(state.x, "x");
  check(state.z, "z");
  check(state.params.b, "b");
  check(state.params.a, "a");
  check(state.params.omega, "omega");
  if (!(state.noise.sigma > 0.0)) throw Error(Errc::invalid_argument, op, "sigma must be positive");
  const auto& p = state.priors;
  if (!(p.sigma_b > 0.0 && p.sigma_a > 0.0 && p.sigma_omega > 0.0)) {
    throw Error(Errc::invalid_argument, op, "parameter uncertainties must be positive");
  }
}

double eval_L1(const EstimationState& state, const ObservationSeries& obs,
               const KernelTables& tables, double epsilon) {
  check_tables(obs, tables, "eval_L1");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw Error(Errc::invalid_argument, "eval_L1", "epsilon outside [0, 1]");
  }
  if (epsilon == 1.0) {
    double sum = 0.0;
    for (const double r : tables.rho0) sum += std::log(r);
    return sum / static_cast<double>(tables.n);
  }
  return detail::l1<double>(state.x, obs.values(), tables, epsilon);
}

double eval_L2(const EstimationState& state, const ObservationSeries& obs,
               const KernelTables& tables) {
  check_tables(obs, tables, "eval_L2");
  return detail::l2<double>(state.x, obs.values(), tables);
}

std::pair<double, double> eval_L3_L4(const EstimationState& state, const ObservationSeries& obs,
                                     const KernelTables& tables, const EffectiveGaps& gaps) {
  check_tables(obs, tables, "eval_L3_L4");
  return detail::l3_l4<double>(view(state), tables, gaps, state.noise.sigma);
}

std::array<double, 3> eval_Lparams(const EstimationState& state, const KernelTables& tables,
                                   const EffectiveGaps&) {
  for (std::size_t j = 1; j < tables.n; ++j) {
    if (!(tables.one_minus_dl[j] > 0.0)) {
      throw Error(Errc::degenerate, "eval_Lparams",
                  "degenerate variance at gap " + std::to_string(j));
    }
  }
  const auto& p = state.priors;
  return {detail::lparam<double>(state.params.b, p.b_tilde, p.sigma_b, tables),
          detail::lparam<double>(state.params.a, p.a_tilde, p.sigma_a, tables),
          detail::lparam<double>(state.params.omega, p.omega_tilde, p.sigma_omega, tables)};
}

ObjectiveComponents eval_components(const EstimationState& state, const ObservationSeries& obs,
                                    const KernelTables& tables, const EffectiveGaps& gaps,
                                    const WeightSchedule& schedule) {
  ObjectiveComponents c;
  if (schedule.active(kL1)) c.values[kL1] = eval_L1(state, obs, tables, schedule.epsilon);
  if (schedule.active(kL2)) c.values[kL2] = eval_L2(state, obs, tables);
  if (schedule.active(kL3) || schedule.active(kL4)) {
    const auto [l3, l4] = eval_L3_L4(state, obs, tables, gaps);
    c.values[kL3] = l3;
    c.values[kL4] = l4;
  }
  if (schedule.active(kLb) || schedule.active(kLa) || schedule.active(kLomega)) {
    const auto lp = eval_Lparams(state, tables, gaps);
    c.values[kLb] = lp[0];
    c.values[kLa] = lp[1];
    c.values[kLomega] = lp[2];
  }
  return c;
}

ObjectiveComponents eval_all_components(const EstimationState& state,
                                        const ObservationSeries& obs, const KernelTables& tables,
                                        const EffectiveGaps& gaps, double epsilon) {
  WeightSchedule all;
  all.lambda.fill(1.0);
  all.epsilon = epsilon;
  return eval_components(state, obs, tables, gaps, all);
}

double eval_total(const EstimationState& state, const ObservationSeries& obs,
                  const KernelTables& tables, const EffectiveGaps& gaps,
                  const WeightSchedule& schedule) {
  return eval_components(state, obs, tables, gaps, schedule).weighted(schedule.lambda);
}

}  // namespace msda
