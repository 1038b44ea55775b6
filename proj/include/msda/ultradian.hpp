#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "msda/timeseries.hpp"

namespace msda {

// Glucose-insulin model with a three-stage delay chain. Masses in mg/mU,
// volumes in litres, time in minutes.
struct UltradianState {
  double Ip = 40.0;
  double Ii = 40.0;
  double G = 10000.0;
  double h1 = 40.0;
  double h2 = 40.0;
  double h3 = 40.0;

  std::array<double, 6> as_array() const { return {Ip, Ii, G, h1, h2, h3}; }
  static UltradianState from_array(const std::array<double, 6>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
  }
};

enum class KappaForm {
  sturis,      // (1/C4)(1/V_i + 1/(E t_i)): the original model, steady without feeding
  as_printed,  // (1/C4)(1/V_i - 1/(E t_i))
};

struct UltradianParams {
  double V_p = 3.0;
  double V_i = 11.0;
  double V_g = 10.0;
  double E = 0.2;
  double t_p = 6.0;
  double t_i = 100.0;
  double t_d = 12.0;
  double k = 0.5;  // ingested-glucose decay; unused by the tube-feed driver
  double R_m = 209.0;
  double a_1 = 6.6;
  double C_1 = 300.0;
  double C_2 = 144.0;
  double C_3 = 100.0;
  double C_4 = 80.0;
  double C_5 = 26.0;
  double U_b = 72.0;
  double U_0 = 4.0;
  double U_m = 94.0;
  double R_g = 180.0;
  double alpha = 7.5;
  double beta = 1.772;
  KappaForm kappa_form = KappaForm::sturis;

  double kappa() const;
  void validate() const;
};

UltradianParams nominal_params();
// Nominal values with the three refitted constants of the simulated ICU patient.
UltradianParams icu_fit_params();

struct NutritionInterval {
  double t_start = 0.0;
  double t_end = 0.0;
  double rate = 0.0;  // mg/min
};

// Piecewise-constant feeding over half-open, non-overlapping intervals.
class NutritionSchedule {
 public:
  NutritionSchedule() = default;
  explicit NutritionSchedule(std::vector<NutritionInterval> intervals);

  static NutritionSchedule constant(double rate, double t_start, double t_end);

  double rate(double t) const;
  const std::vector<NutritionInterval>& intervals() const { return intervals_; }

 private:
  std::vector<NutritionInterval> intervals_;  // sorted by t_start
};

double nutrition_rate(double t, const NutritionSchedule& schedule);

// "t_start_min,t_end_min,rate_mg_per_min"; a header line is optional.
NutritionSchedule load_nutrition(const std::filesystem::path& path);

namespace ultradian {
double f1(double G, const UltradianParams& p);
double f2(double G, const UltradianParams& p);
double f3(double Ii, const UltradianParams& p);
double f4(double h3, const UltradianParams& p);
}  // namespace ultradian

UltradianState ultradian_rhs(const UltradianState& s, const UltradianParams& p, double I_G);

struct SimulationOptions {
  double t_end = 10080.0;
  double dt = 0.1;
  double transient = 2000.0;  // discarded lead-in, driven at the t = 0 rate
  UltradianState initial;
};

// Minute-sampled trajectory starting at t = 0 after the transient.
struct SimulationTrace {
  std::vector<double> t;
  std::vector<UltradianState> states;
  double V_g = 10.0;

  double glucose_mg_dl(std::size_t i) const { return states[i].G / V_g * 0.1; }
  ObservationSeries glucose() const;
};

SimulationTrace simulate(const UltradianParams& params, const NutritionSchedule& schedule,
                         const SimulationOptions& options);

// Header "t,G_mg_dl,Ip,Ii,h1,h2,h3".
void save_trace(const SimulationTrace& trace, const std::filesystem::path& path);
// Reads the glucose column of a saved trace as observations.
ObservationSeries load_glucose_trace(const std::filesystem::path& path);

}  // namespace msda
