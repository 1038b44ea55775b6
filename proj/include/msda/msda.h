#ifndef MSDA_MSDA_H
#define MSDA_MSDA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(MSDA_BUILDING)
#    define MSDA_API __declspec(dllexport)
#  else
#    define MSDA_API __declspec(dllimport)
#  endif
#else
#  define MSDA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum msda_status {
  MSDA_OK = 0,
  MSDA_ERR_INVALID_ARGUMENT = 1,
  MSDA_ERR_IO = 2,
  MSDA_ERR_PARSE = 3,
  MSDA_ERR_NUMERIC = 4,
  MSDA_ERR_DEGENERATE = 5,
  MSDA_ERR_STALLED = 6,
  MSDA_ERR_INTERNAL = 7
} msda_status;

/* Functions with an `out` parameter set *out to NULL when they fail. */

/* Message of the last failure on the calling thread, "operation: detail".
   Empty after a successful call. */
MSDA_API const char* msda_last_error(void);
MSDA_API const char* msda_version(void);

typedef struct msda_series msda_series;
typedef struct msda_kicks msda_kicks;
typedef struct msda_nutrition msda_nutrition;
typedef struct msda_simulation msda_simulation;
typedef struct msda_result msda_result;

/* Observations: headerless "time_min,value" rows. */
MSDA_API msda_status msda_series_load(const char* path, msda_series** out);
/* Accepts either an observation file or a simulator trace (by its header). */
MSDA_API msda_status msda_series_load_any(const char* path, msda_series** out);
MSDA_API msda_status msda_series_create(const double* times, const double* values, size_t n,
                                        msda_series** out);
MSDA_API size_t msda_series_size(const msda_series* series);
/* Either destination may be NULL; each must hold msda_series_size() values. */
MSDA_API msda_status msda_series_copy(const msda_series* series, double* times, double* values);
MSDA_API msda_status msda_series_save(const msda_series* series, const char* path);
MSDA_API void msda_series_free(msda_series* series);

/* Kicks: headerless "time_min,intensity" rows. T_s sets alpha_kick; the
   estimator rescales it once the short time-scale is known. */
MSDA_API msda_status msda_kicks_load(const char* path, double T_s, msda_kicks** out);
MSDA_API msda_status msda_kicks_create(const double* times, const double* intensities, size_t n,
                                       double T_s, msda_kicks** out);
MSDA_API size_t msda_kicks_size(const msda_kicks* kicks);
MSDA_API double msda_kicks_alpha(const msda_kicks* kicks);
MSDA_API void msda_kicks_free(msda_kicks* kicks);

typedef enum msda_measurement_kind {
  MSDA_MEASURE_EXPLICIT = 1, /* h1 */
  MSDA_MEASURE_RANDOM = 2,   /* h2 */
  MSDA_MEASURE_PERIODIC = 3  /* h3 */
} msda_measurement_kind;

typedef struct msda_measurement_spec {
  int kind;
  double gap_low;
  double gap_high;
  double period;
  const double* explicit_times;
  size_t explicit_count;
  uint64_t seed;
} msda_measurement_spec;

/* Defaults: gaps [60, 90], period 5, seed 0, no explicit times. */
MSDA_API msda_measurement_spec msda_measurement_default(int kind);
MSDA_API msda_status msda_subsample(const msda_series* dense, const msda_measurement_spec* spec,
                                    msda_series** out);

typedef enum msda_kappa_form { MSDA_KAPPA_STURIS = 0, MSDA_KAPPA_AS_PRINTED = 1 } msda_kappa_form;

typedef struct msda_ultradian_params {
  double V_p, V_i, V_g, E, t_p, t_i, t_d, k, R_m, a_1;
  double C_1, C_2, C_3, C_4, C_5, U_b, U_0, U_m, R_g, alpha, beta;
  int kappa_form;
} msda_ultradian_params;

MSDA_API void msda_params_nominal(msda_ultradian_params* out);
MSDA_API void msda_params_icu_fit(msda_ultradian_params* out);

/* "t_start_min,t_end_min,rate_mg_per_min" rows, optional header. */
MSDA_API msda_status msda_nutrition_load(const char* path, msda_nutrition** out);
MSDA_API msda_status msda_nutrition_constant(double rate, double t_start, double t_end,
                                             msda_nutrition** out);
MSDA_API void msda_nutrition_free(msda_nutrition* nutrition);

typedef struct msda_sim_options {
  double t_end;
  double dt;
  double transient;
  double initial[6]; /* Ip, Ii, G, h1, h2, h3 */
} msda_sim_options;

MSDA_API msda_sim_options msda_sim_options_default(void);
/* nutrition may be NULL (no feeding). */
MSDA_API msda_status msda_simulate(const msda_ultradian_params* params,
                                   const msda_nutrition* nutrition,
                                   const msda_sim_options* options, msda_simulation** out);
/* Writes the "t,G_mg_dl,Ip,Ii,h1,h2,h3" trace. */
MSDA_API msda_status msda_simulation_save(const msda_simulation* sim, const char* path);
MSDA_API msda_status msda_simulation_glucose(const msda_simulation* sim, msda_series** out);
MSDA_API void msda_simulation_free(msda_simulation* sim);

/* kicks and config_json may be NULL. */
MSDA_API msda_status msda_estimate(const msda_series* obs, const msda_kicks* kicks,
                                   const char* config_json, msda_result** out);
/* Validates a configuration without running anything; NULL means defaults. */
MSDA_API msda_status msda_config_check(const char* config_json);
/* states.csv, reconstruction.csv, densities.csv, trace.csv and run.json. */
MSDA_API msda_status msda_result_write(const msda_result* result, const char* dir);
MSDA_API size_t msda_result_size(const msda_result* result);
/* Seven values: L1, L2, L3, L4, Lb, La, Lomega. */
MSDA_API msda_status msda_result_components(const msda_result* result, double* out);
/* Each destination may be NULL or hold msda_result_size() values. */
MSDA_API msda_status msda_result_states(const msda_result* result, double* x, double* z,
                                        double* b, double* a, double* omega);
/* Resolved configuration as JSON; owned by the result. */
MSDA_API const char* msda_result_config(const msda_result* result);
MSDA_API msda_status msda_result_reconstruct(const msda_result* result, const double* grid,
                                             size_t count, double* values, int* dashed);
MSDA_API void msda_result_free(msda_result* result);

/* Reads the (t, x) columns of a states.csv file. */
MSDA_API msda_status msda_states_load(const char* path, msda_series** out);
/* Writes "value,rho_x,rho_y" at at_time for estimated values x attached to
   obs times. The bandwidth is the rule of thumb on obs values. */
MSDA_API msda_status msda_densities_save(const msda_series* obs, const msda_series* x,
                                         const msda_kicks* kicks, double T_l, double at_time,
                                         int points, const char* path);

#ifdef __cplusplus
}
#endif

#endif
