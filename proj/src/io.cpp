#include "msda/io.hpp"

#include <json.hpp>

#include <string>

#include "msda/csv.hpp"
#include "msda/error.hpp"

namespace msda {

using nlohmann::json;

namespace {

const std::vector<std::string> kStatesHeader = {"t", "x", "z", "b", "a", "omega"};
const std::vector<std::string> kReconstructionHeader = {"t", "value", "dashed"};
const std::vector<std::string> kDensityHeader = {"value", "rho_x", "rho_y"};
const std::vector<std::string> kTraceHeader = {"stage", "iter", "L",  "L1", "L2",
                                               "L3",    "L4",   "Lb", "La", "Lomega"};

std::string header_line(const std::vector<std::string>& header) {
  std::string out;
  for (const auto& h : header) out += (out.empty() ? "" : ",") + h;
  return out + '\n';
}

void append_row(std::string& out, std::initializer_list<double> values) {
  bool first = true;
  for (const double v : values) {
    if (!first) out += ',';
    out += csv::format(v);
    first = false;
  }
  out += '\n';
}

}  // namespace

StatesTable states_table(const EstimationResult& result) {
  const auto& s = result.state;
  const auto t = result.obs.times();
  return {{t.begin(), t.end()}, s.x, s.z, s.params.b, s.params.a, s.params.omega};
}

void save_states(const StatesTable& st, const std::filesystem::path& path) {
  std::string out = header_line(kStatesHeader);
  for (std::size_t j = 0; j < st.t.size(); ++j) {
    append_row(out, {st.t[j], st.x[j], st.z[j], st.b[j], st.a[j], st.omega[j]});
  }
  csv::write_file(path, out, "save_states");
}

StatesTable load_states(const std::filesystem::path& path) {
  const auto table = csv::read_table(path, kStatesHeader, "load_states");
  return {table.numeric_column("t"), table.numeric_column("x"), table.numeric_column("z"),
          table.numeric_column("b"), table.numeric_column("a"), table.numeric_column("omega")};
}

void save_reconstruction(const Reconstruction& rec, const std::filesystem::path& path) {
  std::string out = header_line(kReconstructionHeader);
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    append_row(out, {rec.times[i], rec.values[i], rec.dashed[i] ? 1.0 : 0.0});
  }
  csv::write_file(path, out, "save_reconstruction");
}

Reconstruction load_reconstruction(const std::filesystem::path& path) {
  constexpr const char* op = "load_reconstruction";
  const auto table = csv::read_table(path, kReconstructionHeader, op);
  Reconstruction rec;
  rec.times = table.numeric_column("t");
  rec.values = table.numeric_column("value");
  for (const double d : table.numeric_column("dashed")) {
    if (d != 0.0 && d != 1.0) throw Error(Errc::parse, op, "dashed must be 0 or 1");
    rec.dashed.push_back(d == 1.0);
  }
  return rec;
}

void save_densities(const DensityTable& table, const std::filesystem::path& path) {
  std::string out = header_line(kDensityHeader);
  for (std::size_t i = 0; i < table.grid.size(); ++i) {
    append_row(out, {table.grid[i], table.rho_x[i], table.rho_y[i]});
  }
  csv::write_file(path, out, "save_densities");
}

DensityTable load_densities(const std::filesystem::path& path) {
  const auto table = csv::read_table(path, kDensityHeader, "load_densities");
  DensityTable d;
  d.grid = table.numeric_column("value");
  d.rho_x = table.numeric_column("rho_x");
  d.rho_y = table.numeric_column("rho_y");
  return d;
}

void save_objective_trace(const std::vector<TraceRow>& trace, const std::filesystem::path& path) {
  std::string out = header_line(kTraceHeader);
  for (const auto& row : trace) {
    out += row.stage;
    out += ',';
    out += std::to_string(row.iter);
    out += ',';
    const auto& c = row.components;
    append_row(out, {row.L, c[0], c[1], c[2], c[3], c[4], c[5], c[6]});
  }
  csv::write_file(path, out, "save_objective_trace");
}

std::vector<TraceRow> load_objective_trace(const std::filesystem::path& path) {
  constexpr const char* op = "load_objective_trace";
  const auto table = csv::read_table(path, kTraceHeader, op);
  std::vector<TraceRow> out;
  for (const auto& cells : table.rows) {
    TraceRow row;
    row.stage = cells[0];
    const double iter = csv::parse_number(cells[1], op);
    if (iter != static_cast<int>(iter)) throw Error(Errc::parse, op, "iteration is not an integer");
    row.iter = static_cast<int>(iter);
    row.L = csv::parse_number(cells[2], op);
    for (std::size_t k = 0; k < kComponentCount; ++k) {
      row.components[k] = csv::parse_number(cells[3 + k], op);
    }
    out.push_back(std::move(row));
  }
  return out;
}

namespace {

constexpr const char* kConfigOp = "parse_config";

const std::array<const char*, kStageCount> kWeightKeys = {"stage1a", "stage1b", "stage2"};

double number(const json& j, const char* key) {
  if (!j.is_number()) {
    throw Error(Errc::parse, kConfigOp, std::string("'") + key + "' must be a number");
  }
  return j.get<double>();
}

int integer(const json& j, const char* key) {
  if (!j.is_number_integer()) {
    throw Error(Errc::parse, kConfigOp, std::string("'") + key + "' must be an integer");
  }
  return j.get<int>();
}

bool boolean(const json& j, const char* key) {
  if (!j.is_boolean()) {
    throw Error(Errc::parse, kConfigOp, std::string("'") + key + "' must be true or false");
  }
  return j.get<bool>();
}

void apply_hyper(const json& h, HyperConfig& c) {
  if (!h.is_object()) throw Error(Errc::parse, kConfigOp, "'hyper' must be an object");
  for (const auto& [key, v] : h.items()) {
    const char* k = key.c_str();
    if (key == "T_s") c.T_s = number(v, k);
    else if (key == "T_l") c.T_l = number(v, k);
    else if (key == "epsilon") c.epsilon = number(v, k);
    else if (key == "eta") c.eta = number(v, k);
    else if (key == "eta_growth") c.eta_growth = number(v, k);
    else if (key == "tolerance") c.tolerance = number(v, k);
    else if (key == "density_points") c.density_points = integer(v, k);
    else if (key == "gap_threshold") c.gap_threshold = number(v, k);
    else if (key == "initial_period") c.initial_period = number(v, k);
    else if (key == "hysteresis") c.hysteresis = number(v, k);
    else if (key == "omega_tilde") {
      if (v.is_null()) c.omega_tilde.reset();
      else c.omega_tilde = number(v, k);
    } else if (key == "amplitude_prior") {
      if (v == "mean") c.amplitude_prior = AmplitudePrior::mean_of_peaks;
      else if (v == "zero") c.amplitude_prior = AmplitudePrior::zero;
      else throw Error(Errc::parse, kConfigOp, "'amplitude_prior' must be \"mean\" or \"zero\"");
    } else if (key == "max_iters") {
      if (!v.is_array() || v.size() != kStageCount) {
        throw Error(Errc::parse, kConfigOp, "'max_iters' must list 3 integers");
      }
      for (std::size_t s = 0; s < kStageCount; ++s) c.max_iters[s] = integer(v[s], k);
    } else if (key == "line_search") {
      if (!v.is_object()) throw Error(Errc::parse, kConfigOp, "'line_search' must be an object");
      for (const auto& [lk, lv] : v.items()) {
        if (lk == "enabled") c.line_search.enabled = boolean(lv, "enabled");
        else if (lk == "factor") c.line_search.factor = number(lv, "factor");
        else if (lk == "max_tries") c.line_search.max_tries = integer(lv, "max_tries");
        else throw Error(Errc::parse, kConfigOp, "unknown key 'line_search." + lk + "'");
      }
    } else {
      throw Error(Errc::parse, kConfigOp, "unknown key 'hyper." + key + "'");
    }
  }
}

void validate_config(const HyperConfig& c) {
  const auto fail = [](const std::string& m) { throw Error(Errc::invalid_argument, kConfigOp, m); };
  if (c.T_s < 0.0 || c.T_l < 0.0) fail("time-scales must be positive (0 derives them)");
  if (c.T_s > 0.0 && c.T_l > 0.0 && c.T_l < c.T_s) fail("T_l must be at least T_s");
  if (!(c.epsilon >= 0.0 && c.epsilon < 1.0)) fail("epsilon must lie in [0, 1)");
  if (!(c.eta > 0.0)) fail("eta must be positive");
  if (!(c.eta_growth >= 1.0)) fail("eta_growth must be at least 1");
  if (!(c.line_search.factor > 0.0 && c.line_search.factor < 1.0)) {
    fail("line_search.factor must lie in (0, 1)");
  }
  if (c.line_search.max_tries < 1) fail("line_search.max_tries must be at least 1");
  for (const int cap : c.max_iters) {
    if (cap < 1) fail("iteration caps must be at least 1");
  }
  if (!(c.tolerance >= 0.0)) fail("tolerance must be nonnegative");
  if (c.density_points < 2) fail("density_points must be at least 2");
  if (c.gap_threshold < 0.0) fail("gap_threshold must be nonnegative");
  if (!(c.initial_period > 0.0)) fail("initial_period must be positive");
  if (!(c.hysteresis >= 0.0)) fail("hysteresis must be nonnegative");
  for (const auto& w : c.weights) {
    for (const double v : w) {
      if (!(v >= 0.0)) fail("weights must be nonnegative");
    }
  }
}

}  // namespace

HyperConfig parse_config(std::string_view json_text, const HyperConfig& base) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, kConfigOp, e.what());
  }
  if (!doc.is_object()) throw Error(Errc::parse, kConfigOp, "top level must be an object");
  HyperConfig c = base;
  for (const auto& [key, v] : doc.items()) {
    if (key == "hyper") {
      apply_hyper(v, c);
    } else if (key == "weights") {
      if (!v.is_object()) throw Error(Errc::parse, kConfigOp, "'weights' must be an object");
      for (const auto& [wk, wv] : v.items()) {
        std::size_t stage = kStageCount;
        for (std::size_t s = 0; s < kStageCount; ++s) {
          if (wk == kWeightKeys[s]) stage = s;
        }
        if (stage == kStageCount) throw Error(Errc::parse, kConfigOp, "unknown key 'weights." + wk + "'");
        if (!wv.is_array() || wv.size() != kComponentCount) {
          throw Error(Errc::parse, kConfigOp, "'weights." + wk + "' must list 7 numbers");
        }
        for (std::size_t k = 0; k < kComponentCount; ++k) c.weights[stage][k] = number(wv[k], "weights");
      }
    } else {
      throw Error(Errc::parse, kConfigOp, "unknown key '" + key + "'");
    }
  }
  validate_config(c);
  return c;
}

namespace {

json hyper_json(const HyperConfig& c) {
  json h;
  h["T_s"] = c.T_s;
  h["T_l"] = c.T_l;
  h["epsilon"] = c.epsilon;
  h["eta"] = c.eta;
  h["eta_growth"] = c.eta_growth;
  h["tolerance"] = c.tolerance;
  h["density_points"] = c.density_points;
  h["gap_threshold"] = c.gap_threshold;
  h["initial_period"] = c.initial_period;
  h["hysteresis"] = c.hysteresis;
  h["omega_tilde"] = c.omega_tilde ? json(*c.omega_tilde) : json(nullptr);
  h["amplitude_prior"] = c.amplitude_prior == AmplitudePrior::zero ? "zero" : "mean";
  h["max_iters"] = c.max_iters;
  h["line_search"] = {{"enabled", c.line_search.enabled},
                      {"factor", c.line_search.factor},
                      {"max_tries", c.line_search.max_tries}};
  return h;
}

json weights_json(const HyperConfig& c) {
  json w;
  for (std::size_t s = 0; s < kStageCount; ++s) w[kWeightKeys[s]] = c.weights[s];
  return w;
}

}  // namespace

std::string config_to_json(const HyperConfig& config) {
  return json{{"hyper", hyper_json(config)}, {"weights", weights_json(config)}}.dump(2);
}

std::string run_summary_json(const EstimationResult& r) {
  json doc;
  doc["hyper"] = hyper_json(r.config);
  doc["weights"] = weights_json(r.config);
  doc["n"] = r.obs.size();
  doc["bandwidth"] = r.tables.h;
  doc["a_bar"] = r.a_bar;
  const auto& p = r.state.priors;
  doc["priors"] = {{"b_tilde", p.b_tilde},         {"a_tilde", p.a_tilde},
                   {"omega_tilde", p.omega_tilde}, {"sigma_b", p.sigma_b},
                   {"sigma_a", p.sigma_a},         {"sigma_omega", p.sigma_omega}};
  doc["noise"] = {{"sigma", r.state.noise.sigma}, {"sigma0", r.state.noise.sigma0}};
  json stages = json::array();
  for (std::size_t s = 0; s < kStageCount; ++s) {
    stages.push_back({{"stage", kStageNames[s]},
                      {"iterations", r.iterations[s]},
                      {"line_search_failures", r.line_search_failures[s]},
                      {"converged", r.converged[s]}});
  }
  doc["stages"] = stages;
  json comps;
  for (std::size_t k = 0; k < kComponentCount; ++k) {
    comps[std::string(kComponentNames[k])] = r.final_components.values[k];
  }
  doc["final_components"] = comps;
  doc["kicks"] = {{"count", r.kicks.size()},
                  {"typical_intensity", r.kicks.typical_intensity()},
                  {"alpha_kick", r.kicks.alpha_kick()}};
  return doc.dump(2) + '\n';
}

void write_estimation_outputs(const EstimationResult& result, const std::filesystem::path& dir) {
  save_states(states_table(result), dir / "states.csv");
  save_reconstruction(reconstruct_trajectory(result, minute_grid(result.obs)),
                      dir / "reconstruction.csv");
  const double mid = 0.5 * (result.obs.start() + result.obs.end());
  save_densities(density_table(result.state.x, result.obs, result.tables.h, result.config.T_l,
                               result.kicks, mid, result.config.density_points),
                 dir / "densities.csv");
  save_objective_trace(result.trace, dir / "trace.csv");
  csv::write_file(dir / "run.json", run_summary_json(result), "write_estimation_outputs");
}

}  // namespace msda
