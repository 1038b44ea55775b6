// msda: simulate -> subsample -> estimate -> densities, on plain CSV files.
// Talks to the library only through its C interface.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "msda/msda.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Raised for failures reported by the library; maps to exit code 1.
struct ModuleError {
  std::string message;
};

void check(msda_status status) {
  if (status != MSDA_OK) throw ModuleError{msda_last_error()};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using Series = std::unique_ptr<msda_series, Deleter<msda_series, msda_series_free>>;
using Kicks = std::unique_ptr<msda_kicks, Deleter<msda_kicks, msda_kicks_free>>;
using Nutrition = std::unique_ptr<msda_nutrition, Deleter<msda_nutrition, msda_nutrition_free>>;
using Simulation = std::unique_ptr<msda_simulation, Deleter<msda_simulation, msda_simulation_free>>;
using Result = std::unique_ptr<msda_result, Deleter<msda_result, msda_result_free>>;

fs::path default_output_dir() {
  const char* env = std::getenv("MSDA_OUTPUT_DIR");
  return env != nullptr && *env != '\0' ? fs::path(env) : fs::path(".");
}

std::string read_text(const std::string& path, const char* op) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModuleError{std::string(op) + ": file not found: " + path};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw CLI::ValidationError(what, "not a number: '" + cell + "'");
    }
  }
  return out;
}

std::string format_time(double t) {
  std::ostringstream os;
  os << t;
  return os.str();
}

struct SimulateArgs {
  std::string params = "nominal";
  std::string kappa = "sturis";
  std::string nutrition;
  std::optional<double> rate;
  double t_end = 10080.0;
  double dt = 0.1;
  double transient = 2000.0;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  msda_ultradian_params p;
  if (a.params == "nominal") msda_params_nominal(&p);
  else msda_params_icu_fit(&p);
  p.kappa_form = a.kappa == "sturis" ? MSDA_KAPPA_STURIS : MSDA_KAPPA_AS_PRINTED;

  Nutrition nutrition;
  msda_nutrition* raw = nullptr;
  if (!a.nutrition.empty()) {
    check(msda_nutrition_load(a.nutrition.c_str(), &raw));
    nutrition.reset(raw);
  } else if (a.rate) {
    check(msda_nutrition_constant(*a.rate, 0.0, a.t_end + 1.0, &raw));
    nutrition.reset(raw);
  }
  msda_sim_options opts = msda_sim_options_default();
  opts.t_end = a.t_end;
  opts.dt = a.dt;
  opts.transient = a.transient;
  msda_simulation* sim = nullptr;
  check(msda_simulate(&p, nutrition.get(), &opts, &sim));
  Simulation owned(sim);
  const fs::path out = a.out.empty() ? default_output_dir() / "simulation.csv" : fs::path(a.out);
  check(msda_simulation_save(sim, out.string().c_str()));
  return 0;
}

struct SubsampleArgs {
  std::string in;
  std::string spec;
  std::uint64_t seed = 0;
  double gap_low = 60.0;
  double gap_high = 90.0;
  double period = 5.0;
  std::string times;
  std::string out;
};

int run_subsample(const SubsampleArgs& a) {
  msda_series* raw = nullptr;
  check(msda_series_load_any(a.in.c_str(), &raw));
  Series dense(raw);
  std::vector<double> explicit_times;
  msda_measurement_spec spec;
  if (a.spec == "h1") {
    if (a.times.empty()) throw CLI::ValidationError("--times", "h1 needs --times");
    explicit_times = parse_list(a.times, "--times");
    spec = msda_measurement_default(MSDA_MEASURE_EXPLICIT);
    spec.explicit_times = explicit_times.data();
    spec.explicit_count = explicit_times.size();
  } else if (a.spec == "h2") {
    spec = msda_measurement_default(MSDA_MEASURE_RANDOM);
    spec.gap_low = a.gap_low;
    spec.gap_high = a.gap_high;
    spec.seed = a.seed;
  } else {
    spec = msda_measurement_default(MSDA_MEASURE_PERIODIC);
    spec.period = a.period;
  }
  msda_series* sub = nullptr;
  check(msda_subsample(dense.get(), &spec, &sub));
  Series owned(sub);
  const fs::path out =
      a.out.empty() ? default_output_dir() / ("observations_" + a.spec + ".csv") : fs::path(a.out);
  check(msda_series_save(sub, out.string().c_str()));
  return 0;
}

struct EstimateArgs {
  std::string obs;
  std::string kicks;
  std::string config;
  std::string out_dir;
  std::optional<double> T_s, T_l, epsilon, eta, tolerance, omega_tilde, gap_threshold;
  std::optional<double> initial_period;
  std::optional<int> density_points;
  std::string max_iters;
  std::string amplitude_prior;
  bool no_line_search = false;
};

std::string merged_config(const EstimateArgs& a) {
  json doc = json::object();
  if (!a.config.empty()) {
    try {
      doc = json::parse(read_text(a.config, "parse_config"));
    } catch (const json::parse_error& e) {
      throw ModuleError{std::string("parse_config: ") + e.what()};
    }
    if (!doc.is_object()) throw ModuleError{"parse_config: top level must be an object"};
  }
  json& hyper = doc["hyper"];
  if (hyper.is_null()) hyper = json::object();
  const auto set = [&](const char* key, const auto& value) {
    if (value) hyper[key] = *value;
  };
  set("T_s", a.T_s);
  set("T_l", a.T_l);
  set("epsilon", a.epsilon);
  set("eta", a.eta);
  set("tolerance", a.tolerance);
  set("omega_tilde", a.omega_tilde);
  set("gap_threshold", a.gap_threshold);
  set("initial_period", a.initial_period);
  set("density_points", a.density_points);
  if (!a.amplitude_prior.empty()) hyper["amplitude_prior"] = a.amplitude_prior;
  if (!a.max_iters.empty()) {
    const auto caps = parse_list(a.max_iters, "--max-iters");
    if (caps.size() != 3) throw CLI::ValidationError("--max-iters", "expected three caps");
    hyper["max_iters"] = {static_cast<int>(caps[0]), static_cast<int>(caps[1]),
                          static_cast<int>(caps[2])};
  }
  if (a.no_line_search) hyper["line_search"]["enabled"] = false;
  return doc.dump();
}

int run_estimate(const EstimateArgs& a) {
  msda_series* raw = nullptr;
  check(msda_series_load_any(a.obs.c_str(), &raw));
  Series obs(raw);
  Kicks kicks;
  if (!a.kicks.empty()) {
    msda_kicks* k = nullptr;
    // alpha_kick is rescaled by the estimator once T_s is known
    check(msda_kicks_load(a.kicks.c_str(), 1.0, &k));
    kicks.reset(k);
  }
  const std::string config = merged_config(a);
  check(msda_config_check(config.c_str()));
  msda_result* res = nullptr;
  check(msda_estimate(obs.get(), kicks.get(), config.c_str(), &res));
  Result owned(res);
  const fs::path dir = a.out_dir.empty() ? default_output_dir() / "estimate" : fs::path(a.out_dir);
  check(msda_result_write(res, dir.string().c_str()));
  return 0;
}

struct DensitiesArgs {
  std::string obs;
  std::string states;
  std::string kicks;
  std::string run;
  std::optional<double> T_s, T_l;
  std::string at;
  int points = 201;
  std::string out_dir;
};

int run_densities(const DensitiesArgs& a) {
  double T_s = 0.0, T_l = 0.0;
  if (!a.run.empty()) {
    try {
      const json run = json::parse(read_text(a.run, "densities"));
      T_s = run.at("hyper").at("T_s").get<double>();
      T_l = run.at("hyper").at("T_l").get<double>();
    } catch (const json::exception& e) {
      throw ModuleError{std::string("densities: bad run summary: ") + e.what()};
    }
  }
  if (a.T_s) T_s = *a.T_s;
  if (a.T_l) T_l = *a.T_l;
  if (!(T_l > 0.0)) throw CLI::ValidationError("--T-l", "give --run or --T-l");

  msda_series* raw = nullptr;
  check(msda_series_load_any(a.obs.c_str(), &raw));
  Series obs(raw);
  check(msda_states_load(a.states.c_str(), &raw));
  Series x(raw);
  Kicks kicks;
  if (!a.kicks.empty()) {
    if (!(T_s > 0.0)) throw CLI::ValidationError("--T-s", "kicks need --run or --T-s");
    msda_kicks* k = nullptr;
    check(msda_kicks_load(a.kicks.c_str(), T_s, &k));
    kicks.reset(k);
  }

  std::vector<double> times = parse_list(a.at, "--at");
  if (times.empty()) {
    const std::size_t n = msda_series_size(obs.get());
    std::vector<double> t(n);
    check(msda_series_copy(obs.get(), t.data(), nullptr));
    times.push_back(0.5 * (t.front() + t.back()));
  }
  const fs::path dir = a.out_dir.empty() ? default_output_dir() / "densities" : fs::path(a.out_dir);
  for (const double t : times) {
    const fs::path out = dir / ("densities_t" + format_time(t) + ".csv");
    check(msda_densities_save(obs.get(), x.get(), kicks.get(), T_l, t, a.points,
                              out.string().c_str()));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multicomponent data assimilation for sparse oscillatory series"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Integrate the glucose-insulin model");
  simulate->add_option("--params", sim.params, "Parameter set")
      ->check(CLI::IsMember({"nominal", "icu"}));
  simulate->add_option("--kappa", sim.kappa, "Form of kappa")
      ->check(CLI::IsMember({"sturis", "as-printed"}));
  auto* nut_opt = simulate->add_option("--nutrition", sim.nutrition, "Nutrition schedule CSV");
  simulate->add_option("--rate", sim.rate, "Constant nutrition rate, mg/min")->excludes(nut_opt);
  simulate->add_option("--t-end", sim.t_end, "Horizon in minutes");
  simulate->add_option("--dt", sim.dt, "Integration step in minutes");
  simulate->add_option("--transient", sim.transient, "Discarded lead-in in minutes");
  simulate->add_option("--out", sim.out, "Output trace CSV");

  SubsampleArgs sub;
  auto* subsample = app.add_subcommand("subsample", "Apply a measurement function");
  subsample->add_option("--in", sub.in, "Dense series or simulator trace")->required();
  subsample->add_option("--spec", sub.spec, "h1, h2 or h3")
      ->required()
      ->check(CLI::IsMember({"h1", "h2", "h3"}));
  subsample->add_option("--seed", sub.seed, "Seed for h2");
  subsample->add_option("--gap-low", sub.gap_low, "Shortest h2 gap");
  subsample->add_option("--gap-high", sub.gap_high, "Longest h2 gap");
  subsample->add_option("--period", sub.period, "h3 period");
  subsample->add_option("--times", sub.times, "Comma-separated h1 times");
  subsample->add_option("--out", sub.out, "Output observations CSV");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Run the staged estimator");
  estimate->add_option("--obs", est.obs, "Observations CSV")->required();
  estimate->add_option("--kicks", est.kicks, "Kicks CSV");
  estimate->add_option("--config", est.config, "JSON configuration");
  estimate->add_option("--out-dir", est.out_dir, "Output directory");
  estimate->add_option("--T-s", est.T_s, "Short time-scale, minutes");
  estimate->add_option("--T-l", est.T_l, "Long time-scale, minutes");
  estimate->add_option("--epsilon", est.epsilon, "Mollification weight");
  estimate->add_option("--eta", est.eta, "Initial learning rate");
  estimate->add_option("--tolerance", est.tolerance, "Relative stopping tolerance");
  estimate->add_option("--omega-tilde", est.omega_tilde, "Prior frequency, rad/min");
  estimate->add_option("--gap-threshold", est.gap_threshold, "Dashed reconstruction threshold");
  estimate->add_option("--initial-period", est.initial_period, "Provisional period, minutes");
  estimate->add_option("--density-points", est.density_points, "Density grid size");
  estimate->add_option("--max-iters", est.max_iters, "Caps for stages 1a,1b,2");
  estimate->add_option("--amplitude-prior", est.amplitude_prior, "mean or zero")
      ->check(CLI::IsMember({"mean", "zero"}));
  estimate->add_flag("--no-line-search", est.no_line_search, "Fixed steps");

  DensitiesArgs den;
  auto* densities = app.add_subcommand("densities", "Conditional densities of x and y");
  densities->add_option("--obs", den.obs, "Observations CSV")->required();
  densities->add_option("--states", den.states, "states.csv from estimate")->required();
  densities->add_option("--run", den.run, "run.json from estimate");
  densities->add_option("--kicks", den.kicks, "Kicks CSV");
  densities->add_option("--T-s", den.T_s, "Short time-scale, minutes");
  densities->add_option("--T-l", den.T_l, "Long time-scale, minutes");
  densities->add_option("--at", den.at, "Comma-separated times; default window midpoint");
  densities->add_option("--points", den.points, "Grid size");
  densities->add_option("--out-dir", den.out_dir, "Output directory");

  app.add_subcommand("version", "Print the library version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "simulate") return run_simulate(sim);
    if (name == "subsample") return run_subsample(sub);
    if (name == "estimate") return run_estimate(est);
    if (name == "densities") return run_densities(den);
    std::cout << msda_version() << '\n';
    return 0;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "msda " << name << ": " << e.what() << '\n';
    return 2;
  } catch (const ModuleError& e) {
    std::cerr << "msda " << name << ": " << e.message << '\n';
    return 1;
  }
}
