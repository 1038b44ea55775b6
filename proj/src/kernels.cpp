#include "msda/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "msda/error.hpp"
#include "objective_terms.hpp"

namespace msda {

double bandwidth_rule_of_thumb(std::span<const double> y) {
  constexpr const char* op = "bandwidth_rule_of_thumb";
  if (y.size() < 2) throw Error(Errc::invalid_argument, op, "need at least 2 values");
  const double n = static_cast<double>(y.size());
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ss = 0.0;
  for (const double v : y) ss += (v - mean) * (v - mean);
  const double sigma = std::sqrt(ss / n);
  const bool constant = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
  if (constant || !(sigma > 1e-14 * std::abs(mean))) throw Error(Errc::degenerate, op, "zero variance");
  return sigma / std::pow(n, 0.2);
}

double gaussian_kernel(double u, double v, double h) { return detail::gauss<double>(u, v, h); }

double time_kernel(double distance, double T_l) { return gaussian_kernel(0.0, distance, T_l); }

KernelTables build_tables(const ObservationSeries& obs, const KickSeries& kicks, double T_s,
                          double T_l) {
  constexpr const char* op = "build_tables";
  if (!(T_s > 0.0) || !(T_l > 0.0)) {
    throw Error(Errc::invalid_argument, op, "time-scales must be positive");
  }
  const std::size_t n = obs.size();
  if (n < 2) throw Error(Errc::invalid_argument, op, "need at least 2 observations");

  KernelTables tab;
  tab.n = n;
  tab.T_s = T_s;
  tab.T_l = T_l;
  tab.h = bandwidth_rule_of_thumb(obs.values());
  tab.Ky.resize(n * n);
  tab.Kt.resize(n * n);
  tab.w.resize(n * n);

  const auto t = obs.times();
  const auto y = obs.values();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double ky = gaussian_kernel(y[i], y[j], tab.h);
      tab.Ky[i * n + j] = ky;
      tab.Ky[j * n + i] = ky;
      double dist = std::abs(t[i] - t[j]);
      if (!kicks.empty()) dist += kicks.inflation_between(t[i], t[j]);
      const double kt = time_kernel(dist, T_l);
      tab.Kt[i * n + j] = kt;
      tab.Kt[j * n + i] = kt;
    }
  }

  tab.rho0.assign(n, 0.0);
  tab.mu.assign(n, 0.0);
  std::vector<double> row_sum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sy = 0.0, st = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sy += tab.Ky[i * n + j];
      st += tab.Kt[i * n + j];
    }
    tab.rho0[i] = sy / static_cast<double>(n);
    tab.mu[i] = st / static_cast<double>(n);
    row_sum[i] = st;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double kt = tab.Kt[i * n + j];
      tab.w[i * n + j] = kt / row_sum[j] + kt / row_sum[i];
    }
  }

  tab.ds.assign(n, 1.0);
  tab.dl.assign(n, 1.0);
  tab.one_minus_ds.assign(n, 0.0);
  tab.one_minus_dl.assign(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    double gap = t[j] - t[j - 1];
    if (!kicks.empty()) gap += kicks.inflation_in_gap(t[j - 1], t[j]);
    tab.ds[j] = std::exp(-gap / T_s);
    tab.dl[j] = std::exp(-gap / T_l);
    tab.one_minus_ds[j] = -std::expm1(-gap / T_s);
    tab.one_minus_dl[j] = -std::expm1(-gap / T_l);
  }
  return tab;
}

std::vector<double> kernel_regression(const KernelTables& tables, std::span<const double> values) {
  const std::size_t n = tables.n;
  if (values.size() != n) {
    throw Error(Errc::invalid_argument, "kernel_regression", "length mismatch");
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      num += values[j] * tables.Kt[i * n + j];
      den += tables.Kt[i * n + j];
    }
    out[i] = num / den;
  }
  return out;
}

}  // namespace msda
