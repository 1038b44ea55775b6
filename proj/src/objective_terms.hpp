#pragma once

// Objective components templated on the scalar type of the descended
// variables. double is the production path; long double backs the
// finite-difference verification so that cancellation in L(v+h) - L(v-h)
// does not swamp the comparison.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>

#include "msda/kernels.hpp"
#include "msda/oscillator.hpp"

namespace msda::detail {

template <class Real>
struct StateView {
  std::span<const Real> x;
  std::span<const Real> z;
  std::span<const Real> b;
  std::span<const Real> a;
  std::span<const Real> omega;
};

template <class Real>
Real log_gaussian_kernel(Real u, Real v, double h) {
  const Real d = v - u;
  const Real hh = static_cast<Real>(h);
  return -std::log(std::sqrt(Real(2) * std::numbers::pi_v<Real>) * hh) - d * d / (Real(2) * hh * hh);
}

template <class Real>
Real gauss(Real u, Real v, double h) {
  const Real d = v - u;
  const Real hh = static_cast<Real>(h);
  return std::exp(-d * d / (Real(2) * hh * hh)) / (std::sqrt(Real(2) * std::numbers::pi_v<Real>) * hh);
}

// log((1 - eps) K + eps rho0) without underflow when K is tiny.
template <class Real>
Real l1_term(Real y, Real x, double h, double eps, double rho0) {
  const Real log_k = log_gaussian_kernel(y, x, h);
  if (eps == 0.0) return log_k;
  const Real a = std::log(Real(1) - static_cast<Real>(eps)) + log_k;
  const Real b = std::log(static_cast<Real>(eps) * static_cast<Real>(rho0));
  const Real hi = std::max(a, b);
  const Real lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

template <class Real>
Real l1(std::span<const Real> x, std::span<const double> y, const KernelTables& tab, double eps) {
  Real sum = 0;
  for (std::size_t j = 0; j < tab.n; ++j) {
    sum += l1_term<Real>(static_cast<Real>(y[j]), x[j], tab.h, eps, tab.rho0[j]);
  }
  return sum / static_cast<Real>(tab.n);
}

// -(1/2n) sum_ij w_ij B_ij with B_ij = (Kxx_ij - Kyx_ij) - (Kyx_ji - Kyy_ij),
// i.e. the symmetrized double sum, B and w both symmetric. Each parenthesis
// vanishes exactly when x == y.
template <class Real>
Real l2(std::span<const Real> x, std::span<const double> y, const KernelTables& tab) {
  const std::size_t n = tab.n;
  const double h = tab.h;
  Real diag = 0, off = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Real yi = static_cast<Real>(y[i]);
    const Real kxx = gauss<Real>(x[i], x[i], h);
    const Real kyx = gauss<Real>(yi, x[i], h);
    const Real kyy = static_cast<Real>(tab.Ky[i * n + i]);
    diag += static_cast<Real>(tab.w[i * n + i]) * ((kxx - kyx) - (kyx - kyy));
    Real row = 0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const Real yj = static_cast<Real>(y[j]);
      const Real kxx_ij = gauss<Real>(x[i], x[j], h);
      const Real kyx_ij = gauss<Real>(yi, x[j], h);
      const Real kyx_ji = gauss<Real>(yj, x[i], h);
      const Real kyy_ij = static_cast<Real>(tab.Ky[i * n + j]);
      row += static_cast<Real>(tab.w[i * n + j]) * ((kxx_ij - kyx_ij) - (kyx_ji - kyy_ij));
    }
    off += row;
  }
  return -(diag + Real(2) * off) / (Real(2) * static_cast<Real>(n));
}

template <class Real>
Real normal_logpdf(Real value, Real mean, Real variance) {
  const Real d = value - mean;
  return -Real(0.5) * std::log(Real(2) * std::numbers::pi_v<Real> * variance) -
         d * d / (Real(2) * variance);
}

// (L3, L4): transitions j = 1..n-1, each divided by n.
template <class Real>
std::pair<Real, Real> l3_l4(const StateView<Real>& s, const KernelTables& tab,
                            const EffectiveGaps& gaps, double sigma) {
  const Real var = static_cast<Real>(sigma) * static_cast<Real>(sigma);
  Real sx = 0, sz = 0;
  for (std::size_t j = 1; j < tab.n; ++j) {
    const Real dx = s.x[j - 1] - s.b[j - 1];
    const Real r = std::sqrt(dx * dx + s.z[j - 1] * s.z[j - 1]);
    const Real theta = r == Real(0) ? Real(0) : std::atan2(s.z[j - 1], dx);
    const Real ds = static_cast<Real>(tab.ds[j]);
    const Real rp = static_cast<Real>(tab.one_minus_ds[j]) * s.a[j] + ds * r;
    const Real th = theta + s.omega[j - 1] * static_cast<Real>(gaps.phase[j]);
    sx += normal_logpdf<Real>(s.x[j], s.b[j] + rp * std::cos(th), var);
    sz += normal_logpdf<Real>(s.z[j], rp * std::sin(th), var);
  }
  const Real n = static_cast<Real>(tab.n);
  return {sx / n, sz / n};
}

template <class Real>
Real lparam(std::span<const Real> alpha, double tilde, double sigma_l, const KernelTables& tab) {
  Real sum = 0;
  const Real s2 = static_cast<Real>(sigma_l) * static_cast<Real>(sigma_l);
  for (std::size_t j = 1; j < tab.n; ++j) {
    const Real dl = static_cast<Real>(tab.dl[j]);
    const Real c = static_cast<Real>(tab.one_minus_dl[j]);
    sum += normal_logpdf<Real>(alpha[j], dl * alpha[j - 1] + c * static_cast<Real>(tilde), c * s2);
  }
  return sum / static_cast<Real>(tab.n);
}

}  // namespace msda::detail
