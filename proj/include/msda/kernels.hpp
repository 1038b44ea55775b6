#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "msda/timeseries.hpp"

namespace msda {

// Pairwise kernels and decay factors that depend only on the observations,
// the kicks and the two time-scales. Matrices are row-major n x n.
//
// Kt uses kick-inflated distances |t_i - t_j| + alpha_kick * (kicks strictly
// between t_i and t_j); ds/dl use the kick-inflated gap of [t^{j-1}, t^j).
// Entry 0 of the per-gap vectors describes a zero gap (ds = dl = 1).
struct KernelTables {
  std::size_t n = 0;
  double h = 0.0;
  double T_s = 0.0;
  double T_l = 0.0;

  std::vector<double> Ky;
  std::vector<double> Kt;
  std::vector<double> rho0;
  std::vector<double> mu;
  std::vector<double> ds;
  std::vector<double> dl;
  std::vector<double> one_minus_ds;  // -expm1(-gap/T_s), exact for small gaps
  std::vector<double> one_minus_dl;
  // Symmetrized measure weights Kt_ij / sum_l Kt_jl + Kt_ij / sum_l Kt_il.
  std::vector<double> w;

  double ky(std::size_t i, std::size_t j) const { return Ky[i * n + j]; }
  double kt(std::size_t i, std::size_t j) const { return Kt[i * n + j]; }
  double weight(std::size_t i, std::size_t j) const { return w[i * n + j]; }
};

// h = sigma / n^(1/5), sigma the population standard deviation.
double bandwidth_rule_of_thumb(std::span<const double> y);

double gaussian_kernel(double u, double v, double h);

// Gaussian kernel of bandwidth T_l over a kick-inflated time distance.
double time_kernel(double distance, double T_l);

KernelTables build_tables(const ObservationSeries& obs, const KickSeries& kicks, double T_s,
                          double T_l);

// Kernel regression of `values` on the observation times using Kt.
std::vector<double> kernel_regression(const KernelTables& tables, std::span<const double> values);

}  // namespace msda
