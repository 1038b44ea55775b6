#pragma once

#include <cstddef>
#include <vector>

#include "msda/timeseries.hpp"

namespace msda {

// Flexed parameter trajectories: local mean b, amplitude a, frequency omega
// (rad/min), one value per observation index.
struct ParamTrajectory {
  std::vector<double> b;
  std::vector<double> a;
  std::vector<double> omega;
};

// Relaxation targets and transition uncertainties for each flexed parameter.
struct ParamPriors {
  double b_tilde = 0.0;
  double a_tilde = 0.0;
  double omega_tilde = 0.0;
  double sigma_b = 1.0;
  double sigma_a = 1.0;
  double sigma_omega = 1.0;
};

struct ModelNoise {
  double sigma = 1.0;
  double sigma0 = 0.1;  // stored for completeness; no term uses it
};

struct PolarState {
  double r = 0.0;
  double theta = 0.0;
};

// Raw gaps (they multiply omega) and kick-inflated gaps (they drive the
// exponential decays). Index 0 has no predecessor and holds 0.
struct EffectiveGaps {
  std::vector<double> phase;
  std::vector<double> relax;
};

PolarState to_polar(double x, double z, double b);

// Mean of the next polar state: r relaxes toward a_next over dt_relax, the
// phase advances by omega_prev * dt_phase.
PolarState propagate_mean(PolarState prev, double a_next, double omega_prev, double dt_phase,
                          double dt_relax, double T_s);

struct TransitionLogPdf {
  double x = 0.0;
  double z = 0.0;
};

TransitionLogPdf transition_logpdfs(double x_j, double z_j, PolarState prev, double b_j,
                                    double a_j, double omega_prev, double dt_phase,
                                    double dt_relax, double sigma, double T_s);

// log N(alpha_j; d_l * alpha_prev + (1 - d_l) * alpha_tilde, (1 - d_l) * sigma_l^2).
double param_transition_logpdf(double alpha_j, double alpha_prev, double alpha_tilde,
                               double sigma_l, double dt_relax, double T_l);

EffectiveGaps effective_gaps(const ObservationSeries& obs, const KickSeries& kicks);

}  // namespace msda
