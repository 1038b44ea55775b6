#include "msda/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "msda/error.hpp"
#include "objective_terms.hpp"

namespace msda {

namespace {

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_std(std::span<const double> v) {
  const double m = mean(v);
  double ss = 0.0;
  for (const double e : v) ss += (e - m) * (e - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

std::vector<double> sign_change_frequencies(const ObservationSeries& obs,
                                            std::span<const double> baseline, double hysteresis) {
  constexpr const char* op = "initialize";
  const std::size_t n = obs.size();
  const auto t = obs.times();
  const auto y = obs.values();
  std::vector<double> d(n);
  for (std::size_t j = 0; j < n; ++j) d[j] = y[j] - baseline[j];

  const double scale = std::max(1.0, std::abs(mean(y)));
  const double band = std::max(hysteresis * population_std(d), 1e-9 * scale);

  // A crossing counts once the signal leaves the band on the other side; it is
  // placed by linear interpolation after the last sample on the old side.
  std::vector<double> crossings;
  int side = 0;
  std::size_t last_on_side = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const int s = d[k] > band ? 1 : (d[k] < -band ? -1 : 0);
    if (s == 0) continue;
    if (side != 0 && s != side) {
      std::size_t m = k - 1;
      while (m > last_on_side && !(d[m] * side > 0.0)) --m;
      const double d0 = d[m], d1 = d[m + 1];
      const double frac = d0 == d1 ? 0.5 : d0 / (d0 - d1);
      crossings.push_back(t[m] + std::clamp(frac, 0.0, 1.0) * (t[m + 1] - t[m]));
    }
    side = s;
    last_on_side = k;
  }
  if (crossings.size() < 2) {
    throw Error(Errc::degenerate, op,
                "cannot estimate frequency: fewer than 2 sign changes of y - b; supply "
                "omega_tilde");
  }

  std::vector<double> omega(n);
  for (std::size_t j = 0; j < n; ++j) {
    // span [c_k, c_{k+1}] containing t^j; outside the first/last span inherit it
    const auto it = std::upper_bound(crossings.begin(), crossings.end(), t[j]);
    std::size_t k = static_cast<std::size_t>(it - crossings.begin());
    k = std::clamp<std::size_t>(k, 1, crossings.size() - 1);
    const double half_period = crossings[k] - crossings[k - 1];
    omega[j] = std::numbers::pi / std::max(half_period, 1e-12);
  }
  return omega;
}

Initialization initialize(const ObservationSeries& obs, const KickSeries& kicks,
                          const HyperConfig& config) {
  constexpr const char* op = "initialize";
  const std::size_t n = obs.size();
  if (n < 4) throw Error(Errc::invalid_argument, op, "need at least 4 observations");
  if (!(config.initial_period > 0.0)) {
    throw Error(Errc::invalid_argument, op, "initial_period must be positive");
  }
  if (config.T_s < 0.0 || config.T_l < 0.0 || (config.T_s > 0.0 && config.T_l > 0.0 &&
                                                config.T_l < config.T_s)) {
    throw Error(Errc::invalid_argument, op, "time-scales must satisfy 0 < T_s <= T_l");
  }
  const auto y = obs.values();

  // provisional kernels from the default period
  const double T_s0 = config.T_s > 0.0 ? config.T_s : config.initial_period;
  const double T_l0 = config.T_l > 0.0 ? config.T_l : 4.0 * config.initial_period;
  const KickSeries kicks0 = kicks.empty() ? kicks : kicks.rescaled(T_s0);
  const KernelTables provisional = build_tables(obs, kicks0, T_s0, T_l0);
  const std::vector<double> b0 = kernel_regression(provisional, y);

  std::vector<double> local_freq;
  std::vector<double> omega;
  if (config.omega_tilde) {
    if (!(*config.omega_tilde > 0.0)) {
      throw Error(Errc::invalid_argument, op, "omega_tilde must be positive");
    }
    local_freq.assign(n, *config.omega_tilde);
    omega = local_freq;
  } else {
    local_freq = sign_change_frequencies(obs, b0, config.hysteresis);
    omega = kernel_regression(provisional, local_freq);
  }
  const double omega_tilde = config.omega_tilde ? *config.omega_tilde : mean(omega);
  const double period = 2.0 * std::numbers::pi / omega_tilde;

  Initialization init;
  init.config = config;
  init.config.T_s = config.T_s > 0.0 ? config.T_s : period;
  init.config.T_l = config.T_l > 0.0 ? config.T_l : 4.0 * period;
  if (init.config.T_l < init.config.T_s) {
    throw Error(Errc::invalid_argument, op, "derived T_l is shorter than T_s");
  }
  if (init.config.gap_threshold <= 0.0) init.config.gap_threshold = init.config.T_s;
  init.kicks = kicks.empty() ? kicks : kicks.rescaled(init.config.T_s);
  init.tables = build_tables(obs, init.kicks, init.config.T_s, init.config.T_l);
  init.gaps = effective_gaps(obs, init.kicks);

  std::vector<double> b = kernel_regression(init.tables, y);
  std::vector<double> peak(n, 0.0);
  const auto t = obs.times();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(t[j] - t[i]) < init.config.T_s) peak[i] = std::max(peak[i], std::abs(y[j] - b[j]));
    }
  }
  std::vector<double> a = kernel_regression(init.tables, peak);

  EstimationState& s = init.state;
  s.x.assign(y.begin(), y.end());
  s.z.assign(n, 0.0);
  s.params.b = std::move(b);
  s.params.a = std::move(a);
  s.params.omega = std::move(omega);
  s.priors.b_tilde = mean(y);
  s.priors.sigma_b = population_std(y);
  s.priors.sigma_a = s.priors.sigma_b;
  s.priors.a_tilde = config.amplitude_prior == AmplitudePrior::zero ? 0.0 : mean(peak);
  s.priors.omega_tilde = omega_tilde;
  s.priors.sigma_omega = omega_tilde;
  init.a_bar = mean(s.params.a);
  if (!(init.a_bar > 0.0)) throw Error(Errc::degenerate, op, "zero mean amplitude");
  s.noise.sigma = init.a_bar;
  s.noise.sigma0 = 0.1 * init.a_bar;
  init.peak_amplitude = std::move(peak);
  init.local_frequency = std::move(local_freq);
  return init;
}

namespace {

enum Block : std::size_t { kBx = 0, kBz, kBb, kBa, kBomega, kBlockCount };

// Tracks the current value of every component and the cached gradient of
// the data terms, which depend on x alone.
class StageEvaluator {
 public:
  StageEvaluator(const ObservationSeries& obs, const KernelTables& tab, const EffectiveGaps& gaps,
                 const WeightSchedule& sched)
      : obs_(obs), tab_(tab), gaps_(gaps), sched_(sched), data_grad_(tab.n, 0.0) {}

  void refresh_data(const std::vector<double>& x) {
    std::fill(data_grad_.begin(), data_grad_.end(), 0.0);
    const auto [l1, l2] = data_terms_value_grad(x, obs_, tab_, sched_.epsilon, sched_.lambda[kL1],
                                                sched_.lambda[kL2], data_grad_);
    comps_[kL1] = l1;
    comps_[kL2] = l2;
  }

  void refresh_model(const EstimationState& s) { model_values(s, comps_); }

  void model_values(const EstimationState& s, Weights& out) const {
    const detail::StateView<double> v{s.x, s.z, s.params.b, s.params.a, s.params.omega};
    const auto [l3, l4] = detail::l3_l4<double>(v, tab_, gaps_, s.noise.sigma);
    out[kL3] = l3;
    out[kL4] = l4;
    const auto& p = s.priors;
    out[kLb] = detail::lparam<double>(s.params.b, p.b_tilde, p.sigma_b, tab_);
    out[kLa] = detail::lparam<double>(s.params.a, p.a_tilde, p.sigma_a, tab_);
    out[kLomega] = detail::lparam<double>(s.params.omega, p.omega_tilde, p.sigma_omega, tab_);
  }

  double total(const Weights& c) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < kComponentCount; ++k) {
      if (sched_.lambda[k] != 0.0) sum += sched_.lambda[k] * c[k];
    }
    return sum;
  }

  const Weights& components() const { return comps_; }
  double total() const { return total(comps_); }

  // One line-searched ascent step on a block; false if every try decreased L.
  // `backtracked` is set once the step size had to shrink.
  bool step(Block block, EstimationState& s, double& eta, const HyperConfig& cfg, double floor,
            bool& backtracked) {
    GradientBundle g(tab_.n);
    add_model_gradients(s, tab_, gaps_, sched_, g);
    std::vector<double>* var = nullptr;
    std::vector<double>* grad = nullptr;
    switch (block) {
      case kBx:
        var = &s.x;
        grad = &g.d_x;
        for (std::size_t j = 0; j < tab_.n; ++j) g.d_x[j] += data_grad_[j];
        break;
      case kBz: var = &s.z; grad = &g.d_z; break;
      case kBb: var = &s.params.b; grad = &g.d_b; break;
      case kBa: var = &s.params.a; grad = &g.d_a; break;
      default: var = &s.params.omega; grad = &g.d_omega; break;
    }
    if (std::all_of(grad->begin(), grad->end(), [](double e) { return e == 0.0; })) {
      backtracked = true;  // nothing to calibrate
      return true;
    }

    const std::vector<double> backup = *var;
    const double current = total();
    const int tries = cfg.line_search.enabled ? std::max(1, cfg.line_search.max_tries) : 1;
    std::vector<double> trial_data_grad(tab_.n);
    for (int attempt = 0; attempt < tries; ++attempt) {
      for (std::size_t j = 0; j < tab_.n; ++j) {
        double v = backup[j] + eta * (*grad)[j];
        if (block == kBa || block == kBomega) v = std::max(v, floor);
        (*var)[j] = v;
      }
      Weights trial = comps_;
      if (block == kBx) {
        std::fill(trial_data_grad.begin(), trial_data_grad.end(), 0.0);
        const auto [l1, l2] = data_terms_value_grad(s.x, obs_, tab_, sched_.epsilon,
                                                    sched_.lambda[kL1], sched_.lambda[kL2],
                                                    trial_data_grad);
        trial[kL1] = l1;
        trial[kL2] = l2;
      }
      model_values(s, trial);
      const double value = total(trial);
      if (!cfg.line_search.enabled || (std::isfinite(value) && value >= current)) {
        comps_ = trial;
        if (block == kBx) data_grad_.swap(trial_data_grad);
        if (attempt == 0 && cfg.line_search.enabled) eta *= cfg.eta_growth;
        return true;
      }
      eta *= cfg.line_search.factor;
      backtracked = true;
    }
    *var = backup;
    return false;
  }

 private:
  const ObservationSeries& obs_;
  const KernelTables& tab_;
  const EffectiveGaps& gaps_;
  const WeightSchedule& sched_;
  Weights comps_{};
  std::vector<double> data_grad_;
};

}  // namespace

StageReport run_stage(EstimationState& state, const ObservationSeries& obs,
                      const KernelTables& tables, const EffectiveGaps& gaps,
                      const WeightSchedule& schedule, BlockMask mask, int max_iters,
                      const HyperConfig& config, const std::string& stage_name) {
  constexpr const char* op = "run_stage";
  const std::size_t n = obs.size();
  if (tables.n != n) throw Error(Errc::invalid_argument, op, "tables size mismatch");
  validate_state(state, n);
  if (max_iters < 0) throw Error(Errc::invalid_argument, op, "negative iteration cap");

  StageEvaluator ev(obs, tables, gaps, schedule);
  ev.refresh_data(state.x);
  ev.refresh_model(state);

  std::vector<Block> blocks;
  if (mask.x) blocks.push_back(kBx);
  if (mask.z) blocks.push_back(kBz);
  if (mask.params) {
    blocks.push_back(kBb);
    blocks.push_back(kBa);
    blocks.push_back(kBomega);
  }
  std::array<double, kBlockCount> eta;
  eta.fill(config.eta);
  std::array<double, kBlockCount> floor{};
  floor[kBa] = 1e-6 * mean(state.params.a);
  floor[kBomega] = 1e-6 * mean(state.params.omega);

  // A block whose step size has only ever grown is still far from its
  // natural scale, so small changes in L say nothing about convergence yet.
  std::array<bool, kBlockCount> calibrated{};
  if (!config.line_search.enabled) calibrated.fill(true);

  StageReport report;
  report.trace.push_back({stage_name, 0, ev.total(), ev.components()});
  int stalled = 0;
  for (int it = 1; it <= max_iters; ++it) {
    const double before = ev.total();
    bool any = false;
    for (const Block b : blocks) {
      if (ev.step(b, state, eta[b], config, floor[b], calibrated[b])) {
        any = true;
      } else {
        ++report.line_search_failures;
      }
    }
    const double after = ev.total();
    report.iterations = it;
    report.trace.push_back({stage_name, it, after, ev.components()});
    if (!std::isfinite(after)) {
      throw Error(Errc::numeric, op, "objective became non-finite at iteration " + std::to_string(it));
    }
    if (!any && !blocks.empty()) {
      if (++stalled >= 3) {
        throw Error(Errc::stalled, op,
                    "line search failed on every block for 3 consecutive iterations (stage " +
                        stage_name + ", iteration " + std::to_string(it) + ")");
      }
      continue;
    }
    stalled = 0;
    const bool settled = std::all_of(blocks.begin(), blocks.end(),
                                     [&](Block b) { return calibrated[b]; });
    if (settled && std::abs(after - before) < config.tolerance * (1.0 + std::abs(after))) {
      report.converged = true;
      break;
    }
  }
  return report;
}

EstimationResult estimate(const ObservationSeries& obs, const KickSeries& kicks,
                          const HyperConfig& config) {
  Initialization init = initialize(obs, kicks, config);
  EstimationResult result;
  result.obs = obs;
  result.config = init.config;
  result.kicks = init.kicks;
  result.a_bar = init.a_bar;
  result.state = std::move(init.state);
  EstimationState& s = result.state;

  const std::array<BlockMask, kStageCount> masks = {BlockMask{false, true, false},
                                                    BlockMask{false, true, false},
                                                    BlockMask{true, true, true}};
  const std::array<double, kStageCount> sigma = {2.0 * init.a_bar, 2.0 * init.a_bar, init.a_bar};
  for (std::size_t st = 0; st < kStageCount; ++st) {
    WeightSchedule sched;
    sched.lambda = result.config.weights[st];
    sched.epsilon = result.config.epsilon;
    s.noise.sigma = sigma[st];
    StageReport rep = run_stage(s, obs, init.tables, init.gaps, sched, masks[st],
                                result.config.max_iters[st], result.config, kStageNames[st]);
    result.iterations[st] = rep.iterations;
    result.line_search_failures[st] = rep.line_search_failures;
    result.converged[st] = rep.converged;
    result.trace.insert(result.trace.end(), rep.trace.begin(), rep.trace.end());
  }
  s.noise.sigma = init.a_bar;
  s.noise.sigma0 = 0.1 * init.a_bar;
  result.final_components =
      eval_all_components(s, obs, init.tables, init.gaps, result.config.epsilon);
  result.tables = std::move(init.tables);
  result.gaps = std::move(init.gaps);
  return result;
}

std::vector<double> minute_grid(const ObservationSeries& obs) {
  std::vector<double> grid;
  const double t0 = obs.start();
  const double t1 = obs.end();
  const auto steps = static_cast<std::size_t>(std::floor(t1 - t0));
  grid.reserve(steps + 2);
  for (std::size_t k = 0; k <= steps; ++k) grid.push_back(t0 + static_cast<double>(k));
  if (grid.back() < t1) grid.push_back(t1);
  return grid;
}

Reconstruction reconstruct_trajectory(const EstimationResult& result,
                                      std::span<const double> grid) {
  constexpr const char* op = "reconstruct_trajectory";
  const auto& obs = result.obs;
  const auto& s = result.state;
  const std::size_t n = obs.size();
  const auto t = obs.times();
  Reconstruction out;
  out.times.assign(grid.begin(), grid.end());
  out.values.reserve(grid.size());
  out.radius.reserve(grid.size());
  out.dashed.reserve(grid.size());
  for (const double tg : grid) {
    if (!(tg >= obs.start() && tg <= obs.end())) {
      throw Error(Errc::invalid_argument, op, "grid time " + std::to_string(tg) + " outside span");
    }
    auto it = std::upper_bound(t.begin(), t.end(), tg);
    std::size_t j = static_cast<std::size_t>(it - t.begin()) - 1;  // t[j] <= tg
    if (tg == t[j] || j + 1 >= n) {
      const PolarState p = to_polar(s.x[j], s.z[j], s.params.b[j]);
      out.values.push_back(s.x[j]);
      out.radius.push_back(p.r);
      out.dashed.push_back(false);
      continue;
    }
    const PolarState prev = to_polar(s.x[j], s.z[j], s.params.b[j]);
    const double dt_phase = tg - t[j];
    double dt_relax = dt_phase;
    if (!result.kicks.empty()) dt_relax += result.kicks.inflation_in_gap(t[j], tg);
    const PolarState m = propagate_mean(prev, s.params.a[j + 1], s.params.omega[j], dt_phase,
                                        dt_relax, result.config.T_s);
    out.values.push_back(s.params.b[j + 1] + m.r * std::cos(m.theta));
    out.radius.push_back(m.r);
    out.dashed.push_back(t[j + 1] - t[j] > result.config.gap_threshold);
  }
  return out;
}

std::vector<double> density_estimate(std::span<const double> values,
                                     std::span<const double> times, double h, double T_l,
                                     const KickSeries& kicks, double at_time,
                                     std::span<const double> grid) {
  constexpr const char* op = "density_estimate";
  if (values.size() != times.size() || values.empty()) {
    throw Error(Errc::invalid_argument, op, "values and times must be non-empty and equal length");
  }
  if (!(h > 0.0) || !(T_l > 0.0)) throw Error(Errc::invalid_argument, op, "bandwidths must be positive");
  std::vector<double> weight(times.size());
  double total = 0.0;
  for (std::size_t l = 0; l < times.size(); ++l) {
    double dist = std::abs(at_time - times[l]);
    if (!kicks.empty()) dist += kicks.inflation_between(at_time, times[l]);
    weight[l] = time_kernel(dist, T_l);
    total += weight[l];
  }
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (!std::isfinite(grid[g])) throw Error(Errc::invalid_argument, op, "grid value not finite");
    double sum = 0.0;
    for (std::size_t l = 0; l < values.size(); ++l) {
      sum += gaussian_kernel(grid[g], values[l], h) * weight[l];
    }
    out[g] = total > 0.0 ? sum / total : 0.0;
  }
  return out;
}

DensityTable density_table(std::span<const double> x, const ObservationSeries& obs, double h,
                           double T_l, const KickSeries& kicks, double at_time, int points) {
  if (points < 2) throw Error(Errc::invalid_argument, "density_estimate", "need at least 2 points");
  const auto y = obs.values();
  const auto [ylo, yhi] = std::minmax_element(y.begin(), y.end());
  const auto [xlo, xhi] = std::minmax_element(x.begin(), x.end());
  const double lo = std::min(*ylo, *xlo) - 4.0 * h;
  const double hi = std::max(*yhi, *xhi) + 4.0 * h;
  DensityTable table;
  table.at_time = at_time;
  table.grid.resize(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    table.grid[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (points - 1);
  }
  table.rho_x = density_estimate(x, obs.times(), h, T_l, kicks, at_time, table.grid);
  table.rho_y = density_estimate(y, obs.times(), h, T_l, kicks, at_time, table.grid);
  return table;
}

}  // namespace msda
