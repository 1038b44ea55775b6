#pragma once

// Reference routines written straight from the formulas, sharing no code with
// the library. Tests compare the library against these.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "msda/objective.hpp"
#include "msda/ultradian.hpp"

namespace oracle {

inline double normal_pdf(double v, double mean, double sd) {
  const double u = (v - mean) / sd;
  return std::exp(-0.5 * u * u) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

inline double log_normal_pdf(double v, double mean, double sd) {
  const double u = (v - mean) / sd;
  return -0.5 * u * u - std::log(sd * std::sqrt(2.0 * std::numbers::pi));
}

// L1 = mean of log((1 - eps) K(y_j, x_j) + eps rho0_j), rho0 recomputed here.
inline double L1(const std::vector<double>& x, const std::vector<double>& y, double h,
                 double eps) {
  const std::size_t n = y.size();
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double rho0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) rho0 += normal_pdf(y[i], y[j], h);
    rho0 /= static_cast<double>(n);
    sum += std::log((1.0 - eps) * normal_pdf(y[j], x[j], h) + eps * rho0);
  }
  return sum / static_cast<double>(n);
}

// Naive full double loop of the symmetrized measure-agreement term.
inline double L2(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& Kt, double h) {
  const std::size_t n = y.size();
  std::vector<double> row_sum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < n; ++l) row_sum[i] += Kt[i * n + l];
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = Kt[i * n + j] / row_sum[j] + Kt[i * n + j] / row_sum[i];
      const double bracket = normal_pdf(x[i], x[j], h) - 2.0 * normal_pdf(y[i], x[j], h) +
                             normal_pdf(y[i], y[j], h);
      total += w * bracket;
    }
  }
  return -total / (2.0 * static_cast<double>(n));
}

struct Transition {
  double mean_x;
  double mean_z;
};

// Mean of (x_j, z_j) given the previous point, in plain Cartesian arithmetic.
inline Transition transition_mean(double x_prev, double z_prev, double b_prev, double b_j,
                                  double a_j, double omega_prev, double dt_phase,
                                  double dt_relax, double T_s) {
  const double r = std::sqrt((x_prev - b_prev) * (x_prev - b_prev) + z_prev * z_prev);
  const double theta = r == 0.0 ? 0.0 : std::atan2(z_prev, x_prev - b_prev);
  const double d = std::exp(-dt_relax / T_s);
  const double r_plus = (1.0 - d) * a_j + d * r;
  const double th = theta + omega_prev * dt_phase;
  return {b_j + r_plus * std::cos(th), r_plus * std::sin(th)};
}

// L3 and L4 summed directly over transitions j = 1..n-1.
inline std::pair<double, double> L3_L4(const msda::EstimationState& s,
                                       const std::vector<double>& t,
                                       const std::vector<double>& dt_relax, double T_s) {
  const std::size_t n = t.size();
  double l3 = 0.0, l4 = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    const auto m = transition_mean(s.x[j - 1], s.z[j - 1], s.params.b[j - 1], s.params.b[j],
                                   s.params.a[j], s.params.omega[j - 1], t[j] - t[j - 1],
                                   dt_relax[j], T_s);
    l3 += log_normal_pdf(s.x[j], m.mean_x, s.noise.sigma);
    l4 += log_normal_pdf(s.z[j], m.mean_z, s.noise.sigma);
  }
  return {l3 / static_cast<double>(n), l4 / static_cast<double>(n)};
}

inline double Lparam(const std::vector<double>& alpha, double tilde, double sigma_l,
                     const std::vector<double>& dt_relax, double T_l) {
  const std::size_t n = alpha.size();
  double sum = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    const double d = std::exp(-dt_relax[j] / T_l);
    sum += log_normal_pdf(alpha[j], d * alpha[j - 1] + (1.0 - d) * tilde,
                          std::sqrt((1.0 - d) * sigma_l * sigma_l));
  }
  return sum / static_cast<double>(n);
}

// Second transcription of the glucose-insulin right-hand side, written from
// the model formulas on a plain array.
inline std::array<double, 6> ultradian_rhs(const std::array<double, 6>& s,
                                           const msda::UltradianParams& p, double I_G) {
  const double Ip = s[0], Ii = s[1], G = s[2], h1 = s[3], h2 = s[4], h3 = s[5];
  const double kappa = (1.0 / p.C_4) * (1.0 / p.V_i + 1.0 / (p.E * p.t_i));
  const double f1 = p.R_m / (1.0 + std::exp(-G / (p.V_g * p.C_1) + p.a_1));
  const double f2 = p.U_b * (1.0 - std::exp(-G / (p.C_2 * p.V_g)));
  const double f3 = 1.0 / (p.C_3 * p.V_g) *
                    (p.U_0 + (p.U_m - p.U_0) / (1.0 + std::pow(kappa * Ii, -p.beta)));
  const double f4 = p.R_g / (1.0 + std::exp(p.alpha * (h3 / (p.C_5 * p.V_p) - 1.0)));
  return {f1 - p.E * (Ip / p.V_p - Ii / p.V_i) - Ip / p.t_p,
          p.E * (Ip / p.V_p - Ii / p.V_i) - Ii / p.t_i,
          f4 + I_G - f2 - f3 * G,
          (Ip - h1) / p.t_d,
          (h1 - h2) / p.t_d,
          (h2 - h3) / p.t_d};
}

}  // namespace oracle

namespace fixture {

// Irregular times with gaps uniform on [lo, hi].
inline std::vector<double> irregular_times(std::mt19937_64& rng, std::size_t n, double lo,
                                           double hi) {
  std::uniform_real_distribution<double> gap(lo, hi);
  std::vector<double> t(n);
  for (std::size_t j = 1; j < n; ++j) t[j] = t[j - 1] + gap(rng);
  return t;
}

// Data around a slow oscillation with noise, plus a state perturbed off it
// and kept away from the polar origin.
struct RandomProblem {
  msda::ObservationSeries obs;
  msda::EstimationState state;
};

inline RandomProblem random_problem(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const auto t = irregular_times(rng, n, 3.0, 12.0);
  const double b = 100.0 + 5.0 * unif(rng);
  const double a = 15.0 + 5.0 * unif(rng);
  const double omega = 0.06 * (1.0 + 0.2 * unif(rng));
  std::vector<double> y(n);
  for (std::size_t j = 0; j < n; ++j) y[j] = b + a * std::cos(omega * t[j]) + 2.0 * unif(rng);

  RandomProblem p{msda::ObservationSeries(t, y), {}};
  auto& s = p.state;
  s.x.resize(n);
  s.z.resize(n);
  s.params.b.resize(n);
  s.params.a.resize(n);
  s.params.omega.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double phase = omega * t[j] + 0.3 * unif(rng);
    s.params.b[j] = b + 2.0 * unif(rng);
    s.params.a[j] = a * (1.0 + 0.2 * unif(rng));
    s.params.omega[j] = omega * (1.0 + 0.1 * unif(rng));
    const double r = a * (1.0 + 0.3 * unif(rng));
    s.x[j] = s.params.b[j] + r * std::cos(phase);
    s.z[j] = r * std::sin(phase);
  }
  s.priors = {b, a, omega, 5.0 + unif(rng), 4.0 + unif(rng), 0.02 * (1.5 + unif(rng))};
  s.noise.sigma = 3.0 + unif(rng);
  s.noise.sigma0 = 0.1 * s.noise.sigma;
  return p;
}

// Realization of the canonical oscillator with fixed parameters: each step
// relaxes the radius toward a over T_s, advances the phase by omega dt and
// adds N(0, sigma^2) to both coordinates. Returns the x path.
struct CanonicalTruth {
  double b = 100.0;
  double a = 20.0;
  double period = 100.0;
  double T_s = 10.0;
  double sigma = 2.0;  // 0.1 a
  std::uint64_t seed = 1;

  double omega() const { return 2.0 * std::numbers::pi / period; }

  msda::ObservationSeries sample(double span, double step) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<double> t, y;
    double x = b + a, z = 0.0;
    const auto steps = static_cast<std::size_t>(std::llround(span / step));
    for (std::size_t k = 0; k <= steps; ++k) {
      if (k > 0) {
        const double r = std::hypot(x - b, z);
        const double th = std::atan2(z, x - b);
        const double d = std::exp(-step / T_s);
        const double rp = (1.0 - d) * a + d * r;
        const double tp = th + omega() * step;
        x = b + rp * std::cos(tp) + noise(rng);
        z = rp * std::sin(tp) + noise(rng);
      }
      t.push_back(static_cast<double>(k) * step);
      y.push_back(x);
    }
    return {t, y};
  }
};

}  // namespace fixture
