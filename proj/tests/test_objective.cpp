#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "msda/objective.hpp"
#include "oracles.hpp"

using namespace msda;

namespace {

struct Problem {
  ObservationSeries obs;
  EstimationState state;
  KernelTables tables;
  EffectiveGaps gaps;
};

Problem make(std::uint64_t seed, std::size_t n = 16, const KickSeries& kicks = {}) {
  std::mt19937_64 rng(seed);
  auto p = fixture::random_problem(rng, n);
  auto tab = build_tables(p.obs, kicks, 60.0, 240.0);
  auto gaps = effective_gaps(p.obs, kicks);
  return {p.obs, p.state, std::move(tab), std::move(gaps)};
}

std::vector<double> kt_copy(const KernelTables& t) { return t.Kt; }

}  // namespace

TEST_CASE("L1 at the data with no mollification") {
  auto p = make(1);
  p.state.x.assign(p.obs.values().begin(), p.obs.values().end());
  const double h = p.tables.h;
  CHECK(eval_L1(p.state, p.obs, p.tables, 0.0) ==
        doctest::Approx(std::log(1.0 / (std::sqrt(2 * std::numbers::pi) * h))).epsilon(1e-14));
}

TEST_CASE("L1 with full mollification ignores x") {
  auto p = make(2);
  double expect = 0;
  for (const double r : p.tables.rho0) expect += std::log(r);
  expect /= static_cast<double>(p.obs.size());
  CHECK(eval_L1(p.state, p.obs, p.tables, 1.0) == doctest::Approx(expect).epsilon(1e-14));
  p.state.x[3] += 100.0;
  CHECK(eval_L1(p.state, p.obs, p.tables, 1.0) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("L1 two-point instance against a hand evaluation") {
  const ObservationSeries obs({0.0, 5.0}, {0.0, 2.0});
  const auto tab = build_tables(obs, {}, 10.0, 40.0);
  EstimationState s;
  s.x = {0.0, 1.0};
  s.z = {0.0, 0.0};
  s.params = {{0, 0}, {1, 1}, {1, 1}};
  const double got = eval_L1(s, obs, tab, 0.1);
  CHECK(std::abs(got - oracle::L1(s.x, {0.0, 2.0}, tab.h, 0.1)) < 1e-12);
}

TEST_CASE("L1 peak dominance") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto p = make(seed);
    const auto at_data = [&] {
      auto s = p.state;
      s.x.assign(p.obs.values().begin(), p.obs.values().end());
      return eval_L1(s, p.obs, p.tables, 0.0);
    }();
    CHECK(at_data >= eval_L1(p.state, p.obs, p.tables, 0.0));
  }
}

TEST_CASE("L1 and L2 random instances against the naive reference") {
  for (std::uint64_t seed = 10; seed < 30; ++seed) {
    auto p = make(seed, 3 + seed % 5);
    const std::vector<double> y(p.obs.values().begin(), p.obs.values().end());
    CHECK(std::abs(eval_L1(p.state, p.obs, p.tables, 0.1) - oracle::L1(p.state.x, y, p.tables.h, 0.1)) <
          1e-12);
    CHECK(std::abs(eval_L2(p.state, p.obs, p.tables) -
                   oracle::L2(p.state.x, y, kt_copy(p.tables), p.tables.h)) < 1e-12);
  }
}

TEST_CASE("L2 vanishes at x = y with and without kicks") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const KickSeries kicks({20.0, 45.0}, {1.0, 2.0}, 60.0);
    auto p = make(seed, 20, seed % 2 == 0 ? KickSeries{} : kicks);
    p.state.x.assign(p.obs.values().begin(), p.obs.values().end());
    CHECK(eval_L2(p.state, p.obs, p.tables) == 0.0);
  }
}

TEST_CASE("L2 is nonpositive with uniform weights") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd(0, 10);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto p = make(seed);
    const auto tab = build_tables(p.obs, {}, 60.0, 1e12);
    for (auto& v : p.state.x) v += nd(rng);
    CHECK(eval_L2(p.state, p.obs, tab) <= 1e-12);
  }
}

TEST_CASE("L3 and L4 at the propagated means") {
  auto p = make(3, 12);
  auto& s = p.state;
  for (std::size_t j = 1; j < p.obs.size(); ++j) {
    const auto m = propagate_mean(to_polar(s.x[j - 1], s.z[j - 1], s.params.b[j - 1]),
                                  s.params.a[j], s.params.omega[j - 1], p.gaps.phase[j],
                                  p.gaps.relax[j], p.tables.T_s);
    s.x[j] = s.params.b[j] + m.r * std::cos(m.theta);
    s.z[j] = m.r * std::sin(m.theta);
  }
  const double n = static_cast<double>(p.obs.size());
  const double peak = -0.5 * std::log(2 * std::numbers::pi * s.noise.sigma * s.noise.sigma);
  const auto [l3, l4] = eval_L3_L4(s, p.obs, p.tables, p.gaps);
  CHECK(l3 == doctest::Approx((n - 1) / n * peak).epsilon(1e-13));
  CHECK(l4 == doctest::Approx((n - 1) / n * peak).epsilon(1e-13));

  // moving the last x only touches L3; moving an inner x changes both via the successor
  auto moved = s;
  moved.x.back() += 0.5;
  const auto [m3, m4] = eval_L3_L4(moved, p.obs, p.tables, p.gaps);
  CHECK(m3 < l3);
  CHECK(m4 == l4);
}

TEST_CASE("L3 and L4 random instances against the reference") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const KickSeries kicks({33.0}, {1.0}, 60.0);
    auto p = make(seed, 16, seed % 2 ? kicks : KickSeries{});
    const auto [l3, l4] = eval_L3_L4(p.state, p.obs, p.tables, p.gaps);
    const std::vector<double> t(p.obs.times().begin(), p.obs.times().end());
    const auto [r3, r4] = oracle::L3_L4(p.state, t, p.gaps.relax, p.tables.T_s);
    CHECK(std::abs(l3 - r3) < 1e-12);
    CHECK(std::abs(l4 - r4) < 1e-12);
  }
}

TEST_CASE("parameter terms") {
  const std::size_t n = 9;
  std::vector<double> t(n);
  for (std::size_t j = 0; j < n; ++j) t[j] = 1e7 * static_cast<double>(j);  // huge gaps
  const ObservationSeries obs(t, std::vector<double>{1, 3, 2, 5, 4, 6, 2, 1, 3});
  const auto tab = build_tables(obs, {}, 10.0, 40.0);
  const auto gaps = effective_gaps(obs, {});
  EstimationState s;
  s.x.assign(n, 0.0);
  s.z.assign(n, 0.0);
  s.priors = {5.0, 2.0, 0.1, 1.5, 0.7, 0.02};
  s.params = {std::vector<double>(n, 5.0), std::vector<double>(n, 2.0), std::vector<double>(n, 0.1)};
  const double nn = static_cast<double>(n);
  const auto peak = [](double sl) { return -0.5 * std::log(2 * std::numbers::pi * sl * sl); };
  auto lp = eval_Lparams(s, tab, gaps);
  CHECK(lp[0] == doctest::Approx((nn - 1) / nn * peak(1.5)).epsilon(1e-14));
  CHECK(lp[1] == doctest::Approx((nn - 1) / nn * peak(0.7)).epsilon(1e-14));
  CHECK(lp[2] == doctest::Approx((nn - 1) / nn * peak(0.02)).epsilon(1e-14));

  s.params.b.assign(n, 5.0 + 1.5);
  lp = eval_Lparams(s, tab, gaps);
  CHECK(lp[0] == doctest::Approx((nn - 1) / nn * (peak(1.5) - 0.5)).epsilon(1e-14));

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto p = make(seed);
    const auto got = eval_Lparams(p.state, p.tables, p.gaps);
    const auto& pr = p.state.priors;
    const double T_l = p.tables.T_l;
    CHECK(std::abs(got[0] - oracle::Lparam(p.state.params.b, pr.b_tilde, pr.sigma_b, p.gaps.relax, T_l)) < 1e-12);
    CHECK(std::abs(got[1] - oracle::Lparam(p.state.params.a, pr.a_tilde, pr.sigma_a, p.gaps.relax, T_l)) < 1e-12);
    CHECK(std::abs(got[2] - oracle::Lparam(p.state.params.omega, pr.omega_tilde, pr.sigma_omega,
                                           p.gaps.relax, T_l)) < 1e-12);
  }
}

TEST_CASE("eval_total is the weighted sum") {
  auto p = make(4);
  WeightSchedule none;
  CHECK(eval_total(p.state, p.obs, p.tables, p.gaps, none) == 0.0);
  CHECK(eval_total(p.state, p.obs, p.tables, p.gaps, WeightSchedule::one_hot(kL1)) ==
        eval_L1(p.state, p.obs, p.tables, 0.1));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 3);
  for (int k = 0; k < 20; ++k) {
    WeightSchedule w;
    for (auto& l : w.lambda) l = u(rng);
    const auto [l3, l4] = eval_L3_L4(p.state, p.obs, p.tables, p.gaps);
    const auto lp = eval_Lparams(p.state, p.tables, p.gaps);
    const double manual = w.lambda[0] * eval_L1(p.state, p.obs, p.tables, w.epsilon) +
                          w.lambda[1] * eval_L2(p.state, p.obs, p.tables) + w.lambda[2] * l3 +
                          w.lambda[3] * l4 + w.lambda[4] * lp[0] + w.lambda[5] * lp[1] +
                          w.lambda[6] * lp[2];
    const double total = eval_total(p.state, p.obs, p.tables, p.gaps, w);
    CHECK(std::abs(total - manual) < 1e-12 * (1 + std::abs(manual)));
    WeightSchedule w2 = w;
    for (auto& l : w2.lambda) l *= 2;
    CHECK(eval_total(p.state, p.obs, p.tables, p.gaps, w2) == doctest::Approx(2 * total).epsilon(1e-14));
  }
}

TEST_CASE("components are translation covariant") {
  auto p = make(6);
  const double c = 37.25;
  std::vector<double> y(p.obs.values().begin(), p.obs.values().end());
  for (auto& v : y) v += c;
  const ObservationSeries shifted(std::vector<double>(p.obs.times().begin(), p.obs.times().end()), y);
  const auto tab = build_tables(shifted, {}, 60.0, 240.0);
  auto s = p.state;
  for (auto& v : s.x) v += c;
  for (auto& v : s.params.b) v += c;
  s.priors.b_tilde += c;
  const auto before = eval_all_components(p.state, p.obs, p.tables, p.gaps, 0.1);
  const auto after = eval_all_components(s, shifted, tab, p.gaps, 0.1);
  for (std::size_t k = 0; k < kComponentCount; ++k) {
    CHECK(after.values[k] == doctest::Approx(before.values[k]).epsilon(1e-9));
  }
}

TEST_CASE("zero gaps are rejected by the parameter terms") {
  const ObservationSeries obs({0.0, 1.0}, {1.0, 2.0});
  auto tab = build_tables(obs, {}, 10.0, 40.0);
  tab.one_minus_dl[1] = 0.0;
  EstimationState s;
  s.x = {1, 2};
  s.z = {0, 0};
  s.params = {{1, 1}, {1, 1}, {1, 1}};
  CHECK_THROWS_WITH(eval_Lparams(s, tab, effective_gaps(obs, {})), doctest::Contains("degenerate"));
}
