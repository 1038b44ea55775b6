#include "msda/msda.h"

#include <algorithm>
#include <array>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "msda/csv.hpp"
#include "msda/error.hpp"
#include "msda/io.hpp"
#include "msda/kernels.hpp"
#include "msda/optimizer.hpp"
#include "msda/timeseries.hpp"
#include "msda/ultradian.hpp"

struct msda_series {
  msda::ObservationSeries series;
};

struct msda_kicks {
  msda::KickSeries kicks;
};

struct msda_nutrition {
  msda::NutritionSchedule schedule;
};

struct msda_simulation {
  msda::SimulationTrace trace;
};

struct msda_result {
  msda::EstimationResult result;
  std::string config_json;
};

namespace {

thread_local std::string last_error;

msda_status to_status(msda::Errc code) {
  switch (code) {
    case msda::Errc::invalid_argument: return MSDA_ERR_INVALID_ARGUMENT;
    case msda::Errc::io: return MSDA_ERR_IO;
    case msda::Errc::parse: return MSDA_ERR_PARSE;
    case msda::Errc::numeric: return MSDA_ERR_NUMERIC;
    case msda::Errc::degenerate: return MSDA_ERR_DEGENERATE;
    case msda::Errc::stalled: return MSDA_ERR_STALLED;
  }
  return MSDA_ERR_INTERNAL;
}

template <class F>
msda_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return MSDA_OK;
  } catch (const msda::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return MSDA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = std::string("internal: ") + e.what();
    return MSDA_ERR_INTERNAL;
  } catch (...) {
    last_error = "internal: unknown exception";
    return MSDA_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) {
    throw msda::Error(msda::Errc::invalid_argument, "msda", std::string(what) + " is NULL");
  }
}

msda::UltradianParams from_c(const msda_ultradian_params& c) {
  msda::UltradianParams p;
  p.V_p = c.V_p; p.V_i = c.V_i; p.V_g = c.V_g; p.E = c.E;
  p.t_p = c.t_p; p.t_i = c.t_i; p.t_d = c.t_d; p.k = c.k;
  p.R_m = c.R_m; p.a_1 = c.a_1;
  p.C_1 = c.C_1; p.C_2 = c.C_2; p.C_3 = c.C_3; p.C_4 = c.C_4; p.C_5 = c.C_5;
  p.U_b = c.U_b; p.U_0 = c.U_0; p.U_m = c.U_m; p.R_g = c.R_g;
  p.alpha = c.alpha; p.beta = c.beta;
  if (c.kappa_form == MSDA_KAPPA_STURIS) {
    p.kappa_form = msda::KappaForm::sturis;
  } else if (c.kappa_form == MSDA_KAPPA_AS_PRINTED) {
    p.kappa_form = msda::KappaForm::as_printed;
  } else {
    throw msda::Error(msda::Errc::invalid_argument, "ultradian_params", "unknown kappa form");
  }
  return p;
}

void to_c(const msda::UltradianParams& p, msda_ultradian_params* c) {
  *c = {p.V_p, p.V_i, p.V_g, p.E,   p.t_p, p.t_i, p.t_d, p.k,   p.R_m,   p.a_1, p.C_1,
        p.C_2, p.C_3, p.C_4, p.C_5, p.U_b, p.U_0, p.U_m, p.R_g, p.alpha, p.beta,
        p.kappa_form == msda::KappaForm::sturis ? MSDA_KAPPA_STURIS : MSDA_KAPPA_AS_PRINTED};
}

void copy_out(const std::vector<double>& src, double* dst) {
  if (dst != nullptr) std::copy(src.begin(), src.end(), dst);
}

}  // namespace

extern "C" {

const char* msda_last_error(void) { return last_error.c_str(); }

const char* msda_version(void) { return "0.1.0"; }

msda_status msda_series_load(const char* path, msda_series** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    *out = new msda_series{msda::load_observations(path)};
  });
}

msda_status msda_series_load_any(const char* path, msda_series** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    const std::string text = msda::csv::read_file(path, "load_observations");
    const auto rows = msda::csv::split_rows(text);
    if (!rows.empty() && !rows.front().empty() && rows.front()[0] == "t") {
      *out = new msda_series{msda::load_glucose_trace(path)};
    } else {
      *out = new msda_series{msda::load_observations(path)};
    }
  });
}

msda_status msda_series_create(const double* times, const double* values, size_t n,
                               msda_series** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    if (n > 0) {
      require(times, "times");
      require(values, "values");
    }
    *out = new msda_series{msda::ObservationSeries({times, times + n}, {values, values + n})};
  });
}

size_t msda_series_size(const msda_series* series) {
  return series == nullptr ? 0 : series->series.size();
}

msda_status msda_series_copy(const msda_series* series, double* times, double* values) {
  return guarded([&] {
    require(series, "series");
    const auto t = series->series.times();
    const auto y = series->series.values();
    if (times != nullptr) std::copy(t.begin(), t.end(), times);
    if (values != nullptr) std::copy(y.begin(), y.end(), values);
  });
}

msda_status msda_series_save(const msda_series* series, const char* path) {
  return guarded([&] {
    require(series, "series");
    require(path, "path");
    msda::save_observations(series->series, path);
  });
}

void msda_series_free(msda_series* series) { delete series; }

msda_status msda_kicks_load(const char* path, double T_s, msda_kicks** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    *out = new msda_kicks{msda::load_kicks(path, T_s)};
  });
}

msda_status msda_kicks_create(const double* times, const double* intensities, size_t n,
                              double T_s, msda_kicks** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    if (n > 0) {
      require(times, "times");
      require(intensities, "intensities");
    }
    *out = new msda_kicks{msda::KickSeries({times, times + n}, {intensities, intensities + n}, T_s)};
  });
}

size_t msda_kicks_size(const msda_kicks* kicks) { return kicks == nullptr ? 0 : kicks->kicks.size(); }

double msda_kicks_alpha(const msda_kicks* kicks) {
  return kicks == nullptr ? 0.0 : kicks->kicks.alpha_kick();
}

void msda_kicks_free(msda_kicks* kicks) { delete kicks; }

msda_measurement_spec msda_measurement_default(int kind) {
  return {kind, 60.0, 90.0, 5.0, nullptr, 0, 0};
}

msda_status msda_subsample(const msda_series* dense, const msda_measurement_spec* spec,
                           msda_series** out) {
  return guarded([&] {
    require(dense, "dense");
    require(spec, "spec");
    require(out, "out");
    *out = nullptr;
    msda::MeasurementSpec s;
    switch (spec->kind) {
      case MSDA_MEASURE_EXPLICIT:
        if (spec->explicit_count > 0) require(spec->explicit_times, "explicit_times");
        s = msda::MeasurementSpec::h1(
            {spec->explicit_times, spec->explicit_times + spec->explicit_count});
        break;
      case MSDA_MEASURE_RANDOM:
        s = msda::MeasurementSpec::h2(spec->seed, spec->gap_low, spec->gap_high);
        break;
      case MSDA_MEASURE_PERIODIC:
        s = msda::MeasurementSpec::h3(spec->period);
        break;
      default:
        throw msda::Error(msda::Errc::invalid_argument, "subsample", "unknown measurement kind");
    }
    *out = new msda_series{msda::subsample(dense->series, s)};
  });
}

void msda_params_nominal(msda_ultradian_params* out) {
  if (out != nullptr) to_c(msda::nominal_params(), out);
}

void msda_params_icu_fit(msda_ultradian_params* out) {
  if (out != nullptr) to_c(msda::icu_fit_params(), out);
}

msda_status msda_nutrition_load(const char* path, msda_nutrition** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    *out = new msda_nutrition{msda::load_nutrition(path)};
  });
}

msda_status msda_nutrition_constant(double rate, double t_start, double t_end,
                                    msda_nutrition** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    *out = new msda_nutrition{msda::NutritionSchedule::constant(rate, t_start, t_end)};
  });
}

void msda_nutrition_free(msda_nutrition* nutrition) { delete nutrition; }

msda_sim_options msda_sim_options_default(void) {
  const msda::SimulationOptions d;
  const auto init = d.initial.as_array();
  msda_sim_options o{d.t_end, d.dt, d.transient, {}};
  std::copy(init.begin(), init.end(), o.initial);
  return o;
}

msda_status msda_simulate(const msda_ultradian_params* params, const msda_nutrition* nutrition,
                          const msda_sim_options* options, msda_simulation** out) {
  return guarded([&] {
    require(params, "params");
    require(options, "options");
    require(out, "out");
    *out = nullptr;
    msda::SimulationOptions opts;
    opts.t_end = options->t_end;
    opts.dt = options->dt;
    opts.transient = options->transient;
    std::array<double, 6> init{};
    std::copy(options->initial, options->initial + 6, init.begin());
    opts.initial = msda::UltradianState::from_array(init);
    const msda::NutritionSchedule none;
    *out = new msda_simulation{
        msda::simulate(from_c(*params), nutrition ? nutrition->schedule : none, opts)};
  });
}

msda_status msda_simulation_save(const msda_simulation* sim, const char* path) {
  return guarded([&] {
    require(sim, "sim");
    require(path, "path");
    msda::save_trace(sim->trace, path);
  });
}

msda_status msda_simulation_glucose(const msda_simulation* sim, msda_series** out) {
  return guarded([&] {
    require(sim, "sim");
    require(out, "out");
    *out = nullptr;
    *out = new msda_series{sim->trace.glucose()};
  });
}

void msda_simulation_free(msda_simulation* sim) { delete sim; }

msda_status msda_estimate(const msda_series* obs, const msda_kicks* kicks, const char* config_json,
                          msda_result** out) {
  return guarded([&] {
    require(obs, "obs");
    require(out, "out");
    *out = nullptr;
    const msda::HyperConfig config =
        config_json != nullptr ? msda::parse_config(config_json) : msda::HyperConfig{};
    const msda::KickSeries none;
    auto res = std::make_unique<msda_result>();
    res->result = msda::estimate(obs->series, kicks ? kicks->kicks : none, config);
    res->config_json = msda::config_to_json(res->result.config);
    *out = res.release();
  });
}

msda_status msda_config_check(const char* config_json) {
  return guarded([&] {
    if (config_json != nullptr) msda::parse_config(config_json);
  });
}

msda_status msda_result_write(const msda_result* result, const char* dir) {
  return guarded([&] {
    require(result, "result");
    require(dir, "dir");
    msda::write_estimation_outputs(result->result, dir);
  });
}

size_t msda_result_size(const msda_result* result) {
  return result == nullptr ? 0 : result->result.obs.size();
}

msda_status msda_result_components(const msda_result* result, double* out) {
  return guarded([&] {
    require(result, "result");
    require(out, "out");
    const auto& v = result->result.final_components.values;
    std::copy(v.begin(), v.end(), out);
  });
}

msda_status msda_result_states(const msda_result* result, double* x, double* z, double* b,
                               double* a, double* omega) {
  return guarded([&] {
    require(result, "result");
    const auto& s = result->result.state;
    copy_out(s.x, x);
    copy_out(s.z, z);
    copy_out(s.params.b, b);
    copy_out(s.params.a, a);
    copy_out(s.params.omega, omega);
  });
}

const char* msda_result_config(const msda_result* result) {
  return result == nullptr ? "" : result->config_json.c_str();
}

msda_status msda_result_reconstruct(const msda_result* result, const double* grid, size_t count,
                                    double* values, int* dashed) {
  return guarded([&] {
    require(result, "result");
    if (count > 0) require(grid, "grid");
    const auto rec = msda::reconstruct_trajectory(result->result, {grid, count});
    copy_out(rec.values, values);
    if (dashed != nullptr) {
      for (std::size_t i = 0; i < count; ++i) dashed[i] = rec.dashed[i] ? 1 : 0;
    }
  });
}

void msda_result_free(msda_result* result) { delete result; }

msda_status msda_states_load(const char* path, msda_series** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto st = msda::load_states(path);
    *out = new msda_series{msda::ObservationSeries(std::move(st.t), std::move(st.x))};
  });
}

msda_status msda_densities_save(const msda_series* obs, const msda_series* x,
                                const msda_kicks* kicks, double T_l, double at_time, int points,
                                const char* path) {
  return guarded([&] {
    require(obs, "obs");
    require(x, "x");
    require(path, "path");
    const auto t_obs = obs->series.times();
    const auto t_x = x->series.times();
    if (!std::equal(t_obs.begin(), t_obs.end(), t_x.begin(), t_x.end())) {
      throw msda::Error(msda::Errc::invalid_argument, "density_estimate",
                        "estimated states are not on the observation times");
    }
    const msda::KickSeries none;
    const double h = msda::bandwidth_rule_of_thumb(obs->series.values());
    msda::save_densities(msda::density_table(x->series.values(), obs->series, h, T_l,
                                             kicks ? kicks->kicks : none, at_time, points),
                         path);
  });
}

}  // extern "C"
