#include "msda/ultradian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "msda/csv.hpp"
#include "msda/error.hpp"

namespace msda {

double UltradianParams::kappa() const {
  const double exchange = 1.0 / (E * t_i);
  const double sign = kappa_form == KappaForm::sturis ? 1.0 : -1.0;
  return (1.0 / C_4) * (1.0 / V_i + sign * exchange);
}

void UltradianParams::validate() const {
  constexpr const char* op = "ultradian_params";
  const double all[] = {V_p, V_i, V_g, E,   t_p, t_i, t_d, k,     R_m,  a_1, C_1,
                        C_2, C_3, C_4, C_5, U_b, U_0, U_m, R_g, alpha, beta};
  for (const double v : all) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(Errc::invalid_argument, op, "parameters must be positive and finite");
    }
  }
  if (!(U_m > U_0)) throw Error(Errc::invalid_argument, op, "U_m must exceed U_0");
  if (!(kappa() > 0.0)) throw Error(Errc::invalid_argument, op, "kappa must be positive");
}

UltradianParams nominal_params() { return {}; }

UltradianParams icu_fit_params() {
  UltradianParams p;
  p.t_p = 5.5;
  p.a_1 = 7.5;
  p.R_g = 225.0;
  return p;
}

NutritionSchedule::NutritionSchedule(std::vector<NutritionInterval> intervals)
    : intervals_(std::move(intervals)) {
  constexpr const char* op = "nutrition_schedule";
  for (const auto& iv : intervals_) {
    if (!std::isfinite(iv.t_start) || !std::isfinite(iv.t_end) || !std::isfinite(iv.rate)) {
      throw Error(Errc::invalid_argument, op, "non-finite interval");
    }
    if (!(iv.t_start < iv.t_end)) {
      throw Error(Errc::invalid_argument, op, "interval start must precede its end");
    }
    if (iv.rate < 0.0) throw Error(Errc::invalid_argument, op, "negative nutrition rate");
  }
  std::sort(intervals_.begin(), intervals_.end(),
            [](const auto& a, const auto& b) { return a.t_start < b.t_start; });
  for (std::size_t k = 1; k < intervals_.size(); ++k) {
    if (intervals_[k].t_start < intervals_[k - 1].t_end) {
      throw Error(Errc::invalid_argument, op,
                  "overlapping intervals at t = " + csv::format(intervals_[k].t_start));
    }
  }
}

NutritionSchedule NutritionSchedule::constant(double rate, double t_start, double t_end) {
  return NutritionSchedule({{t_start, t_end, rate}});
}

double NutritionSchedule::rate(double t) const {
  // last interval starting at or before t
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), t,
                             [](double v, const auto& iv) { return v < iv.t_start; });
  if (it == intervals_.begin()) return 0.0;
  --it;
  return t < it->t_end ? it->rate : 0.0;
}

double nutrition_rate(double t, const NutritionSchedule& schedule) { return schedule.rate(t); }

NutritionSchedule load_nutrition(const std::filesystem::path& path) {
  constexpr const char* op = "load_nutrition";
  const std::string text = csv::read_file(path, op);
  auto rows = csv::split_rows(text);
  std::vector<NutritionInterval> intervals;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (r == 0 && !row.empty() && row[0] == "t_start_min") continue;
    if (row.size() != 3) {
      throw Error(Errc::parse, op, "row " + std::to_string(r + 1) + ": expected 3 columns");
    }
    intervals.push_back({csv::parse_number(row[0], op), csv::parse_number(row[1], op),
                         csv::parse_number(row[2], op)});
  }
  return NutritionSchedule(std::move(intervals));
}

namespace ultradian {

double f1(double G, const UltradianParams& p) {
  return p.R_m / (1.0 + std::exp(-G / (p.V_g * p.C_1) + p.a_1));
}

double f2(double G, const UltradianParams& p) {
  return p.U_b * (1.0 - std::exp(-G / (p.C_2 * p.V_g)));
}

double f3(double Ii, const UltradianParams& p) {
  const double ki = p.kappa() * Ii;
  // (kappa Ii)^(-beta) diverges at Ii = 0, where the sigmoid is 0
  const double sig = ki > 0.0 ? 1.0 / (1.0 + std::pow(ki, -p.beta)) : 0.0;
  return (p.U_0 + (p.U_m - p.U_0) * sig) / (p.C_3 * p.V_g);
}

double f4(double h3, const UltradianParams& p) {
  return p.R_g / (1.0 + std::exp(p.alpha * (h3 / (p.C_5 * p.V_p) - 1.0)));
}

}  // namespace ultradian

UltradianState ultradian_rhs(const UltradianState& s, const UltradianParams& p, double I_G) {
  const double exchange = p.E * (s.Ip / p.V_p - s.Ii / p.V_i);
  UltradianState d;
  d.Ip = ultradian::f1(s.G, p) - exchange - s.Ip / p.t_p;
  d.Ii = exchange - s.Ii / p.t_i;
  d.G = ultradian::f4(s.h3, p) + I_G - ultradian::f2(s.G, p) - ultradian::f3(s.Ii, p) * s.G;
  d.h1 = (s.Ip - s.h1) / p.t_d;
  d.h2 = (s.h1 - s.h2) / p.t_d;
  d.h3 = (s.h2 - s.h3) / p.t_d;
  return d;
}

namespace {

using Vec = std::array<double, 6>;

Vec axpy(const Vec& x, double a, const Vec& y) {
  Vec out;
  for (std::size_t i = 0; i < 6; ++i) out[i] = x[i] + a * y[i];
  return out;
}

// Classical RK4 with the driver sampled at the step start; it is piecewise
// constant, so this only matters for steps straddling a switch.
Vec rk4_step(const Vec& s, const UltradianParams& p, double I_G, double h) {
  const auto f = [&](const Vec& v) {
    return ultradian_rhs(UltradianState::from_array(v), p, I_G).as_array();
  };
  const Vec k1 = f(s);
  const Vec k2 = f(axpy(s, 0.5 * h, k1));
  const Vec k3 = f(axpy(s, 0.5 * h, k2));
  const Vec k4 = f(axpy(s, h, k3));
  Vec out;
  for (std::size_t i = 0; i < 6; ++i) {
    out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

void check_finite(const Vec& s, double t) {
  for (const double v : s) {
    if (!std::isfinite(v)) {
      throw Error(Errc::numeric, "simulate", "blow-up: non-finite state at t = " + csv::format(t));
    }
  }
}

}  // namespace

ObservationSeries SimulationTrace::glucose() const {
  std::vector<double> g(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) g[i] = glucose_mg_dl(i);
  return ObservationSeries(t, std::move(g));
}

SimulationTrace simulate(const UltradianParams& params, const NutritionSchedule& schedule,
                         const SimulationOptions& options) {
  constexpr const char* op = "simulate";
  params.validate();
  if (!(options.dt > 0.0) || !std::isfinite(options.dt)) {
    throw Error(Errc::invalid_argument, op, "dt must be positive");
  }
  if (!(options.t_end > 0.0)) throw Error(Errc::invalid_argument, op, "t_end must be positive");
  if (options.transient < 0.0) throw Error(Errc::invalid_argument, op, "negative transient");

  // whole steps per output minute
  const auto per_minute = static_cast<long>(std::ceil(1.0 / options.dt - 1e-12));
  const double h = 1.0 / static_cast<double>(per_minute);

  Vec s = options.initial.as_array();
  check_finite(s, -options.transient);
  const auto transient_minutes = static_cast<long>(std::ceil(options.transient));
  const double lead_rate = schedule.rate(0.0);
  for (long m = 0; m < transient_minutes; ++m) {
    for (long k = 0; k < per_minute; ++k) s = rk4_step(s, params, lead_rate, h);
    check_finite(s, static_cast<double>(m + 1 - transient_minutes));
  }

  SimulationTrace trace;
  trace.V_g = params.V_g;
  const auto minutes = static_cast<long>(std::floor(options.t_end));
  trace.t.reserve(static_cast<std::size_t>(minutes) + 1);
  trace.states.reserve(static_cast<std::size_t>(minutes) + 1);
  trace.t.push_back(0.0);
  trace.states.push_back(UltradianState::from_array(s));
  for (long m = 0; m < minutes; ++m) {
    for (long k = 0; k < per_minute; ++k) {
      const double t = static_cast<double>(m) + static_cast<double>(k) * h;
      s = rk4_step(s, params, schedule.rate(t), h);
    }
    check_finite(s, static_cast<double>(m + 1));
    trace.t.push_back(static_cast<double>(m + 1));
    trace.states.push_back(UltradianState::from_array(s));
  }
  return trace;
}

void save_trace(const SimulationTrace& trace, const std::filesystem::path& path) {
  std::string out = "t,G_mg_dl,Ip,Ii,h1,h2,h3\n";
  for (std::size_t i = 0; i < trace.t.size(); ++i) {
    const auto& s = trace.states[i];
    for (const double v : {trace.t[i], trace.glucose_mg_dl(i), s.Ip, s.Ii, s.h1, s.h2, s.h3}) {
      out += csv::format(v);
      out += ',';
    }
    out.back() = '\n';
  }
  csv::write_file(path, out, "save_trace");
}

ObservationSeries load_glucose_trace(const std::filesystem::path& path) {
  constexpr const char* op = "load_glucose_trace";
  const auto table = csv::read_table(path, {"t", "G_mg_dl", "Ip", "Ii", "h1", "h2", "h3"}, op);
  if (table.rows.size() < 2) throw Error(Errc::parse, op, "too few rows");
  return ObservationSeries(table.numeric_column("t"), table.numeric_column("G_mg_dl"));
}

}  // namespace msda
