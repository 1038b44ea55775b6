#include "msda/gradients.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "msda/error.hpp"
#include "objective_terms.hpp"

namespace msda {

std::pair<double, double> data_terms_value_grad(std::span<const double> x,
                                                const ObservationSeries& obs,
                                                const KernelTables& tab, double eps,
                                                double lambda1, double lambda2,
                                                std::vector<double>& d_x, bool all_values) {
  const std::size_t n = tab.n;
  const double nn = static_cast<double>(n);
  const double h2 = tab.h * tab.h;
  const auto y = obs.values();
  double l1 = 0.0, l2 = 0.0;

  if (lambda1 != 0.0 || all_values) {
    const double log1m = std::log1p(-eps);
    for (std::size_t j = 0; j < n; ++j) {
      const double term = detail::l1_term<double>(y[j], x[j], tab.h, eps, tab.rho0[j]);
      l1 += term;
      // (1-eps) K / ((1-eps) K + eps rho0)
      const double share =
          eps == 0.0 ? 1.0 : std::exp(log1m + detail::log_gaussian_kernel<double>(y[j], x[j], tab.h) - term);
      d_x[j] += lambda1 * (y[j] - x[j]) / h2 * share / nn;
    }
    l1 /= nn;
  }

  if (lambda2 != 0.0 || all_values) {
    const double h = tab.h;
    const double scale = -lambda2 / (nn * h2);
    double diag = 0.0, off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double kxx_ii = detail::gauss<double>(x[i], x[i], h);
      const double kyx_ii = detail::gauss<double>(y[i], x[i], h);
      const double w_ii = tab.w[i * n + i];
      diag += w_ii * ((kxx_ii - kyx_ii) - (kyx_ii - tab.Ky[i * n + i]));
      double di = -w_ii * (y[i] - x[i]) * kyx_ii;
      double row = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double w = tab.w[i * n + j];
        const double kxx = detail::gauss<double>(x[i], x[j], h);
        const double kyx_ij = detail::gauss<double>(y[i], x[j], h);
        const double kyx_ji = detail::gauss<double>(y[j], x[i], h);
        row += w * ((kxx - kyx_ij) - (kyx_ji - tab.Ky[i * n + j]));
        // pair (i, j) feeds dL2/dx_j and, mirrored, dL2/dx_i
        d_x[j] += scale * w * ((x[i] - x[j]) * kxx - (y[i] - x[j]) * kyx_ij);
        di += w * ((x[j] - x[i]) * kxx - (y[j] - x[i]) * kyx_ji);
      }
      off += row;
      d_x[i] += scale * di;
    }
    l2 = -(diag + 2.0 * off) / (2.0 * nn);
  }
  return {l1, l2};
}

void add_model_gradients(const EstimationState& s, const KernelTables& tab,
                         const EffectiveGaps& gaps, const WeightSchedule& schedule,
                         GradientBundle& g) {
  const std::size_t n = tab.n;
  const double nn = static_cast<double>(n);
  const double w3 = schedule.lambda[kL3] / nn;
  const double w4 = schedule.lambda[kL4] / nn;

  if (w3 != 0.0 || w4 != 0.0) {
    const auto& a = s.params.a;
    const double a_bar = std::accumulate(a.begin(), a.end(), 0.0) / nn;
    const double r_floor = 1e-8 * std::abs(a_bar);
    const double var = s.noise.sigma * s.noise.sigma;

    for (std::size_t j = 1; j < n; ++j) {
      const std::size_t p = j - 1;
      const double dx = s.x[p] - s.params.b[p];
      const double zp = s.z[p];
      const double r = std::hypot(dx, zp);
      if (!(r > r_floor) || r == 0.0) {
        throw Error(Errc::numeric, "grad_total",
                    "polar singularity: r at index " + std::to_string(p) + " is " +
                        std::to_string(r));
      }
      const double theta = std::atan2(zp, dx);
      const double ds = tab.ds[j];
      const double cds = tab.one_minus_ds[j];
      const double rp = cds * a[j] + ds * r;
      const double th = theta + s.params.omega[p] * gaps.phase[j];
      const double c = std::cos(th);
      const double sn = std::sin(th);

      // d log rho / d r^{j-1} and d log rho / d theta^{j-1}, both terms together
      double d_r = 0.0, d_theta = 0.0;
      if (w3 != 0.0) {
        const double gx = -(s.x[j] - s.params.b[j] - rp * c) / var;
        g.d_x[j] += w3 * gx;
        g.d_b[j] -= w3 * gx;
        g.d_a[j] -= w3 * cds * c * gx;
        d_r -= w3 * ds * c * gx;
        d_theta += w3 * rp * sn * gx;
      }
      if (w4 != 0.0) {
        const double gz = -(s.z[j] - rp * sn) / var;
        g.d_z[j] += w4 * gz;
        g.d_a[j] -= w4 * cds * sn * gz;
        d_r -= w4 * ds * sn * gz;
        d_theta -= w4 * rp * c * gz;
      }
      g.d_omega[p] += gaps.phase[j] * d_theta;
      const double r2 = r * r;
      g.d_x[p] += dx / r * d_r - zp / r2 * d_theta;
      g.d_z[p] += zp / r * d_r + dx / r2 * d_theta;
      g.d_b[p] += -dx / r * d_r + zp / r2 * d_theta;
    }
  }

  const auto add_param = [&](const std::vector<double>& alpha, double tilde, double sigma_l,
                             double lambda, std::vector<double>& d) {
    if (lambda == 0.0) return;
    const double s2 = sigma_l * sigma_l;
    for (std::size_t j = 1; j < n; ++j) {
      const double cdl = tab.one_minus_dl[j];
      if (!(cdl > 0.0)) {
        throw Error(Errc::degenerate, "grad_total",
                    "degenerate variance at gap " + std::to_string(j));
      }
      const double e = alpha[j] - (tab.dl[j] * alpha[j - 1] + cdl * tilde);
      const double ev = e / (cdl * s2);
      d[j] -= lambda * ev / nn;
      d[j - 1] += lambda * tab.dl[j] * ev / nn;
    }
  };
  const auto& pr = s.priors;
  add_param(s.params.b, pr.b_tilde, pr.sigma_b, schedule.lambda[kLb], g.d_b);
  add_param(s.params.a, pr.a_tilde, pr.sigma_a, schedule.lambda[kLa], g.d_a);
  add_param(s.params.omega, pr.omega_tilde, pr.sigma_omega, schedule.lambda[kLomega], g.d_omega);
}

GradientBundle grad_total(const EstimationState& state, const ObservationSeries& obs,
                          const KernelTables& tables, const EffectiveGaps& gaps,
                          const WeightSchedule& schedule) {
  const std::size_t n = obs.size();
  if (tables.n != n) throw Error(Errc::invalid_argument, "grad_total", "tables size mismatch");
  validate_state(state, n);
  GradientBundle g(n);
  data_terms_value_grad(state.x, obs, tables, schedule.epsilon, schedule.lambda[kL1],
                        schedule.lambda[kL2], g.d_x, false);
  add_model_gradients(state, tables, gaps, schedule, g);
  return g;
}

namespace {

using Extended = long double;

struct ExtendedState {
  std::array<std::vector<Extended>, 5> blocks;  // x, z, b, a, omega

  detail::StateView<Extended> view() const {
    return {blocks[0], blocks[1], blocks[2], blocks[3], blocks[4]};
  }
};

Extended eval_total_extended(const ExtendedState& es, const EstimationState& s,
                             const ObservationSeries& obs, const KernelTables& tab,
                             const EffectiveGaps& gaps, const WeightSchedule& sched) {
  const auto& lam = sched.lambda;
  const auto y = obs.values();
  Extended total = 0;
  if (lam[kL1] != 0.0) {
    total += static_cast<Extended>(lam[kL1]) * detail::l1<Extended>(es.blocks[0], y, tab, sched.epsilon);
  }
  if (lam[kL2] != 0.0) {
    total += static_cast<Extended>(lam[kL2]) * detail::l2<Extended>(es.blocks[0], y, tab);
  }
  if (lam[kL3] != 0.0 || lam[kL4] != 0.0) {
    const auto [l3, l4] = detail::l3_l4<Extended>(es.view(), tab, gaps, s.noise.sigma);
    if (lam[kL3] != 0.0) total += static_cast<Extended>(lam[kL3]) * l3;
    if (lam[kL4] != 0.0) total += static_cast<Extended>(lam[kL4]) * l4;
  }
  const auto& p = s.priors;
  if (lam[kLb] != 0.0) {
    total += static_cast<Extended>(lam[kLb]) * detail::lparam<Extended>(es.blocks[2], p.b_tilde, p.sigma_b, tab);
  }
  if (lam[kLa] != 0.0) {
    total += static_cast<Extended>(lam[kLa]) * detail::lparam<Extended>(es.blocks[3], p.a_tilde, p.sigma_a, tab);
  }
  if (lam[kLomega] != 0.0) {
    total += static_cast<Extended>(lam[kLomega]) *
             detail::lparam<Extended>(es.blocks[4], p.omega_tilde, p.sigma_omega, tab);
  }
  return total;
}

}  // namespace

double fd_check(const EstimationState& state, const ObservationSeries& obs,
                const KernelTables& tables, const EffectiveGaps& gaps,
                const WeightSchedule& schedule, double step) {
  if (!(step > 0.0)) throw Error(Errc::invalid_argument, "fd_check", "step must be positive");
  const GradientBundle g = grad_total(state, obs, tables, gaps, schedule);
  const std::array<const std::vector<double>*, 5> analytic = {&g.d_x, &g.d_z, &g.d_b, &g.d_a,
                                                              &g.d_omega};
  const std::array<const std::vector<double>*, 5> values = {
      &state.x, &state.z, &state.params.b, &state.params.a, &state.params.omega};

  ExtendedState es;
  for (std::size_t k = 0; k < 5; ++k) {
    es.blocks[k].assign(values[k]->begin(), values[k]->end());
  }

  double worst = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    const auto& v = *values[k];
    double ss = 0.0;
    for (const double e : v) ss += e * e;
    const double rms = std::sqrt(ss / static_cast<double>(v.size()));
    for (std::size_t j = 0; j < v.size(); ++j) {
      double scale = std::max(std::abs(v[j]), rms);
      if (scale == 0.0) scale = 1.0;
      const Extended hstep = static_cast<Extended>(step * scale);
      auto& slot = es.blocks[k][j];
      const Extended base = slot;
      slot = base + hstep;
      const Extended up = eval_total_extended(es, state, obs, tables, gaps, schedule);
      slot = base - hstep;
      const Extended down = eval_total_extended(es, state, obs, tables, gaps, schedule);
      slot = base;
      const double numeric = static_cast<double>((up - down) / (Extended(2) * hstep));
      const double a = (*analytic[k])[j];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-12});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace msda
