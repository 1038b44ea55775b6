#include <doctest.h>

#include <cmath>
#include <random>

#include "msda/error.hpp"
#include "msda/gradients.hpp"
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

bool all_zero(const std::vector<double>& v) {
  for (const double e : v) {
    if (e != 0.0) return false;
  }
  return true;
}

// Central difference of eval_total in one coordinate, in plain double.
double central(Problem& p, std::vector<double>& v, std::size_t j, const WeightSchedule& w,
               double step) {
  const double keep = v[j];
  v[j] = keep + step;
  const double up = eval_total(p.state, p.obs, p.tables, p.gaps, w);
  v[j] = keep - step;
  const double down = eval_total(p.state, p.obs, p.tables, p.gaps, w);
  v[j] = keep;
  return (up - down) / (2 * step);
}

}  // namespace

TEST_CASE("no active component gives a zero gradient") {
  auto p = make(1);
  const auto g = grad_total(p.state, p.obs, p.tables, p.gaps, WeightSchedule{});
  CHECK(all_zero(g.d_x));
  CHECK(all_zero(g.d_z));
  CHECK(all_zero(g.d_b));
  CHECK(all_zero(g.d_a));
  CHECK(all_zero(g.d_omega));
}

TEST_CASE("data terms only move x") {
  auto p = make(2);
  for (const Component c : {kL1, kL2}) {
    const auto g = grad_total(p.state, p.obs, p.tables, p.gaps, WeightSchedule::one_hot(c));
    CHECK_FALSE(all_zero(g.d_x));
    CHECK(all_zero(g.d_z));
    CHECK(all_zero(g.d_b));
    CHECK(all_zero(g.d_a));
    CHECK(all_zero(g.d_omega));
  }
}

TEST_CASE("the parameter terms leave x and z alone") {
  auto p = make(3);
  for (const Component c : {kLb, kLa, kLomega}) {
    const auto g = grad_total(p.state, p.obs, p.tables, p.gaps, WeightSchedule::one_hot(c));
    CHECK(all_zero(g.d_x));
    CHECK(all_zero(g.d_z));
  }
  const auto gb = grad_total(p.state, p.obs, p.tables, p.gaps, WeightSchedule::one_hot(kLb));
  CHECK(all_zero(gb.d_a));
  CHECK(all_zero(gb.d_omega));
}

TEST_CASE("stationary points of single terms") {
  auto p = make(4);
  // L1 with no mollification peaks at x = y
  auto s = p.state;
  s.x.assign(p.obs.values().begin(), p.obs.values().end());
  auto g = grad_total(s, p.obs, p.tables, p.gaps, WeightSchedule::one_hot(kL1, 0.0));
  for (const double v : g.d_x) CHECK(std::abs(v) < 1e-14);
  // and so does L2
  g = grad_total(s, p.obs, p.tables, p.gaps, WeightSchedule::one_hot(kL2));
  for (const double v : g.d_x) CHECK(std::abs(v) < 1e-14);
  // constant parameters sitting at their priors
  std::fill(s.params.b.begin(), s.params.b.end(), s.priors.b_tilde);
  g = grad_total(s, p.obs, p.tables, p.gaps, WeightSchedule::one_hot(kLb));
  for (const double v : g.d_b) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("analytic gradients match finite differences for each component") {
  const KickSeries kicks({40.0, 71.0}, {1.0, 3.0}, 60.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto p = make(seed, 12, seed % 2 ? kicks : KickSeries{});
    for (std::size_t c = 0; c < kComponentCount; ++c) {
      const auto w = WeightSchedule::one_hot(static_cast<Component>(c));
      CHECK(fd_check(p.state, p.obs, p.tables, p.gaps, w, 1e-5) <= 1e-6);
    }
  }
}

TEST_CASE("mixed weights and the boundary epsilons") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto p = make(100 + seed);
    for (const double eps : {0.0, 0.1, 1.0}) {
      WeightSchedule w;
      for (auto& l : w.lambda) l = u(rng);
      w.epsilon = eps;
      CHECK(fd_check(p.state, p.obs, p.tables, p.gaps, w, 1e-5) <= 1e-6);
    }
  }
}

TEST_CASE("fd_check agrees with a plain double central difference") {
  auto p = make(7);
  const WeightSchedule w{{1, 1, 1, 1, 1, 1, 1}, 0.1};
  const auto g = grad_total(p.state, p.obs, p.tables, p.gaps, w);
  for (const std::size_t j : {0u, 5u, 15u}) {
    CHECK(g.d_x[j] == doctest::Approx(central(p, p.state.x, j, w, 1e-4)).epsilon(1e-5));
    CHECK(g.d_z[j] == doctest::Approx(central(p, p.state.z, j, w, 1e-4)).epsilon(1e-5));
    CHECK(g.d_a[j] == doctest::Approx(central(p, p.state.params.a, j, w, 1e-4)).epsilon(1e-5));
    CHECK(g.d_omega[j] ==
          doctest::Approx(central(p, p.state.params.omega, j, w, 1e-7)).epsilon(1e-5));
  }
}

TEST_CASE("fused data pass equals the separate gradients") {
  auto p = make(8);
  std::vector<double> fused(p.obs.size(), 0.0);
  const auto [l1, l2] =
      data_terms_value_grad(p.state.x, p.obs, p.tables, 0.1, 0.7, 1.3, fused);
  CHECK(l1 == doctest::Approx(eval_L1(p.state, p.obs, p.tables, 0.1)).epsilon(1e-13));
  CHECK(l2 == doctest::Approx(eval_L2(p.state, p.obs, p.tables)).epsilon(1e-12));
  const auto g1 = grad_total(p.state, p.obs, p.tables, p.gaps, WeightSchedule::one_hot(kL1));
  const auto g2 = grad_total(p.state, p.obs, p.tables, p.gaps, WeightSchedule::one_hot(kL2));
  for (std::size_t j = 0; j < fused.size(); ++j) {
    CHECK(fused[j] == doctest::Approx(0.7 * g1.d_x[j] + 1.3 * g2.d_x[j]).epsilon(1e-12));
  }
}

TEST_CASE("the polar origin is reported") {
  auto p = make(5);
  p.state.x[4] = p.state.params.b[4];
  p.state.z[4] = 0.0;
  try {
    grad_total(p.state, p.obs, p.tables, p.gaps, WeightSchedule::one_hot(kL3));
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::numeric);
  }
  // data terms never divide by r
  CHECK_NOTHROW(grad_total(p.state, p.obs, p.tables, p.gaps, WeightSchedule::one_hot(kL1)));
}
