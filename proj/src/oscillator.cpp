#include "msda/oscillator.hpp"

#include <cmath>
#include <numbers>

#include "msda/error.hpp"

namespace msda {

namespace {

double normal_logpdf(double value, double mean, double variance) {
  const double d = value - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) - d * d / (2.0 * variance);
}

}  // namespace

PolarState to_polar(double x, double z, double b) {
  const double dx = x - b;
  const double r = std::hypot(dx, z);
  return {r, r == 0.0 ? 0.0 : std::atan2(z, dx)};
}

PolarState propagate_mean(PolarState prev, double a_next, double omega_prev, double dt_phase,
                          double dt_relax, double T_s) {
  const double ds = std::exp(-dt_relax / T_s);
  const double one_minus_ds = -std::expm1(-dt_relax / T_s);
  return {one_minus_ds * a_next + ds * prev.r, prev.theta + omega_prev * dt_phase};
}

TransitionLogPdf transition_logpdfs(double x_j, double z_j, PolarState prev, double b_j,
                                    double a_j, double omega_prev, double dt_phase,
                                    double dt_relax, double sigma, double T_s) {
  if (!(sigma > 0.0)) throw Error(Errc::invalid_argument, "transition_logpdfs", "sigma <= 0");
  const PolarState plus = propagate_mean(prev, a_j, omega_prev, dt_phase, dt_relax, T_s);
  const double var = sigma * sigma;
  return {normal_logpdf(x_j, b_j + plus.r * std::cos(plus.theta), var),
          normal_logpdf(z_j, plus.r * std::sin(plus.theta), var)};
}

double param_transition_logpdf(double alpha_j, double alpha_prev, double alpha_tilde,
                               double sigma_l, double dt_relax, double T_l) {
  constexpr const char* op = "param_transition_logpdf";
  if (!(sigma_l > 0.0)) throw Error(Errc::invalid_argument, op, "sigma_l <= 0");
  const double dl = std::exp(-dt_relax / T_l);
  const double one_minus_dl = -std::expm1(-dt_relax / T_l);
  if (!(one_minus_dl > 0.0)) throw Error(Errc::degenerate, op, "degenerate variance (zero gap)");
  return normal_logpdf(alpha_j, dl * alpha_prev + one_minus_dl * alpha_tilde,
                       one_minus_dl * sigma_l * sigma_l);
}

EffectiveGaps effective_gaps(const ObservationSeries& obs, const KickSeries& kicks) {
  EffectiveGaps gaps;
  const std::size_t n = obs.size();
  gaps.phase.assign(n, 0.0);
  gaps.relax.assign(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    gaps.phase[j] = obs.gap(j);
    gaps.relax[j] = obs.gap(j);
    if (!kicks.empty()) gaps.relax[j] += kicks.inflation_in_gap(obs.time(j - 1), obs.time(j));
  }
  return gaps;
}

}  // namespace msda
