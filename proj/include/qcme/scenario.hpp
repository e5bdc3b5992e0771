#pragma once

// Scenario configuration (JSON), the figure preset catalog, the multi-method runner
// and CSV + JSON-metadata output.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qcme/light.hpp"
#include "qcme/models.hpp"
#include "qcme/propagators.hpp"

namespace qcme {

inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::json;

enum class Method { Exact, Qcme1, Qcme2, SemiclassicalEcl, SemiclassicalEeff };

inline const std::vector<Method>& all_methods() {
  static const std::vector<Method> m{Method::Exact, Method::Qcme1, Method::Qcme2,
                                     Method::SemiclassicalEcl, Method::SemiclassicalEeff};
  return m;
}

inline std::string to_string(Method m) {
  switch (m) {
    case Method::Exact: return "exact";
    case Method::Qcme1: return "qcme1";
    case Method::Qcme2: return "qcme2";
    case Method::SemiclassicalEcl: return "semiclassical_ecl";
    case Method::SemiclassicalEeff: return "semiclassical_eeff";
  }
  return "?";
}

inline std::optional<Method> parse_method(const std::string& s) {
  for (Method m : all_methods())
    if (to_string(m) == s) return m;
  return std::nullopt;
}

enum class InitialKind { AllGround, AllExcited, Explicit };

struct InitialState {
  InitialKind kind = InitialKind::AllExcited;
  CMatrix rho;  // Explicit only

  friend bool operator==(const InitialState& a, const InitialState& b) {
    if (a.kind != b.kind) return false;
    if (a.kind != InitialKind::Explicit) return true;
    return a.rho.rows() == b.rho.rows() && a.rho.cols() == b.rho.cols() && a.rho == b.rho;
  }
};

inline DensityMatrix initial_density(const InitialState& init, const ModelSpec& spec) {
  const auto d = static_cast<Eigen::Index>(spec.molecular_dim());
  if (init.kind == InitialKind::Explicit) {
    if (init.rho.rows() != d || init.rho.cols() != d)
      throw ConfigError("initial", "explicit density matrix must be " + std::to_string(d) + "x" +
                                       std::to_string(d));
    try {
      return DensityMatrix(Operator(init.rho, spec.molecular_dims()));
    } catch (const InvalidStateError& e) {
      throw ConfigError("initial", e.what());
    }
  }
  // Basis index 0 is |e...e>, index d-1 is |g...g>.
  CVector psi = CVector::Zero(d);
  psi(init.kind == InitialKind::AllExcited ? 0 : d - 1) = 1.0;
  return DensityMatrix::pure(psi, spec.molecular_dims());
}

struct ScenarioConfig {
  std::string name;
  std::string description;
  ModelSpec model;  // photon_trunc resolved
  LightState light = FockState{0};
  InitialState initial;
  PropagationGrid grid;
  std::vector<Method> methods;
  std::vector<std::string> output_channels;  // empty: every channel
  std::optional<int> n_a;                    // override for the effective field

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

inline std::vector<std::string> channel_names(const ModelSpec& spec) {
  std::vector<std::string> out;
  for (const auto& [n, v] : observables(CMatrix::Zero(static_cast<Eigen::Index>(spec.molecular_dim()),
                                                      static_cast<Eigen::Index>(spec.molecular_dim())),
                                        spec))
    out.push_back(n);
  return out;
}

/// Channel plotted in the figures: the population that starts at zero (site 1 for Dicke).
inline std::string primary_channel(const ScenarioConfig& c) {
  if (c.model.kind == ModelKind::Dicke) return c.initial.kind == InitialKind::AllGround ? "P_e_1" : "P_g_1";
  return c.initial.kind == InitialKind::AllGround ? "P_e" : "P_g";
}

// ---------------------------------------------------------------------------
// Defaults

/// max(20, 4<n> + 20), then raised until the light state fits with a 10-level buffer.
inline std::size_t default_photon_trunc(const LightState& light) {
  const double nbar = mean_photon_number(light);
  std::size_t trunc = std::max<std::size_t>(20, static_cast<std::size_t>(std::ceil(4.0 * nbar + 20.0)));
  if (auto top = max_occupied_level(light)) trunc = std::max(trunc, *top + 10);
  return minimal_truncation(light, trunc);
}

inline int nominal_emission_count(const InitialState& init) {
  return init.kind == InitialKind::AllGround ? 0 : 1;
}

/// Eight periods of the slowest light-matter exchange oscillation,
/// Omega = sqrt(detuning^2 + 4 g^2 N (<n> + n_a)), rounded up to a multiple of 10.
inline double default_t_max(const ModelSpec& spec, const LightState& light, int n_a) {
  const double nbar = mean_photon_number(light);
  const double delta = spec.detuning();
  const double omega = std::sqrt(delta * delta + 4.0 * spec.g * spec.g *
                                                     static_cast<double>(spec.n_atoms) *
                                                     (nbar + static_cast<double>(n_a)));
  const double period = omega > 0.0 ? 2.0 * std::numbers::pi / omega
                                     : 2.0 * std::numbers::pi / spec.omega0;
  return 10.0 * std::ceil(8.0 * period / 10.0);
}

inline constexpr std::size_t kTargetSamples = 4000;

inline std::size_t default_output_stride(double t_max, double dt) {
  const auto steps = static_cast<std::size_t>(std::llround(t_max / dt));
  return std::max<std::size_t>(1, (steps + kTargetSamples - 1) / kTargetSamples);
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline void reject_unknown(const json& obj, const std::string& where,
                           const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where, "expected a JSON object");
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) throw ConfigError(where.empty() ? k : where + "." + k, "unknown key");
}

template <class T>
T get_as(const json& obj, const std::string& key, const std::string& path) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::out_of_range&) {
    throw ConfigError(path, "required key is missing");
  } catch (const json::type_error& e) {
    throw ConfigError(path, std::string("wrong type: ") + e.what());
  }
}

template <class T>
std::optional<T> get_opt(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return get_as<T>(obj, key, path);
}

inline std::size_t get_count(const json& obj, const std::string& key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(path, "must be a non-negative integer");
  return v.get<std::size_t>();
}

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline LightState light_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("light", "expected a JSON object");
  const std::string type = get_as<std::string>(j, "type", "light.type");
  LightState state;
  if (type == "fock") {
    reject_unknown(j, "light", {"type", "n"});
    if (!j.contains("n")) throw ConfigError("light.n", "required key is missing");
    state = FockState{get_count(j, "n", "light.n")};
  } else if (type == "fock_superposition") {
    reject_unknown(j, "light", {"type", "n", "c_n", "c_np1"});
    if (!j.contains("n")) throw ConfigError("light.n", "required key is missing");
    state = FockSuperposition{get_count(j, "n", "light.n"), get_as<double>(j, "c_n", "light.c_n"),
                              get_as<double>(j, "c_np1", "light.c_np1")};
  } else if (type == "squeezed_vacuum") {
    reject_unknown(j, "light", {"type", "r"});
    state = SqueezedVacuum{get_as<double>(j, "r", "light.r")};
  } else {
    throw ConfigError("light.type", "expected fock, fock_superposition or squeezed_vacuum");
  }
  validate(state);
  return state;
}

inline json light_to_json(const LightState& s) {
  return std::visit(overloaded{
                        [](const FockState& f) { return json{{"type", "fock"}, {"n", f.n}}; },
                        [](const FockSuperposition& f) {
                          return json{{"type", "fock_superposition"}, {"n", f.n}, {"c_n", f.c_n},
                                      {"c_np1", f.c_np1}};
                        },
                        [](const SqueezedVacuum& f) { return json{{"type", "squeezed_vacuum"}, {"r", f.r}}; },
                    },
                    s);
}

inline InitialState initial_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "all_ground") return {InitialKind::AllGround, {}};
    if (s == "all_excited") return {InitialKind::AllExcited, {}};
    throw ConfigError("initial", "expected all_ground, all_excited or {\"re\": ..., \"im\": ...}");
  }
  reject_unknown(j, "initial", {"re", "im"});
  const auto re = get_as<std::vector<std::vector<double>>>(j, "re", "initial.re");
  const auto im = j.contains("im") ? get_as<std::vector<std::vector<double>>>(j, "im", "initial.im")
                                   : std::vector<std::vector<double>>{};
  const auto d = static_cast<Eigen::Index>(re.size());
  CMatrix rho = CMatrix::Zero(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    if (static_cast<Eigen::Index>(re[r].size()) != d) throw ConfigError("initial.re", "matrix must be square");
    for (Eigen::Index c = 0; c < d; ++c) rho(r, c) = re[r][c];
  }
  if (!im.empty()) {
    if (static_cast<Eigen::Index>(im.size()) != d) throw ConfigError("initial.im", "shape differs from re");
    for (Eigen::Index r = 0; r < d; ++r) {
      if (static_cast<Eigen::Index>(im[r].size()) != d) throw ConfigError("initial.im", "shape differs from re");
      for (Eigen::Index c = 0; c < d; ++c) rho(r, c) += kI * im[r][c];
    }
  }
  return {InitialKind::Explicit, std::move(rho)};
}

inline json initial_to_json(const InitialState& init) {
  if (init.kind == InitialKind::AllGround) return "all_ground";
  if (init.kind == InitialKind::AllExcited) return "all_excited";
  json re = json::array(), im = json::array();
  for (Eigen::Index r = 0; r < init.rho.rows(); ++r) {
    json rr = json::array(), ri = json::array();
    for (Eigen::Index c = 0; c < init.rho.cols(); ++c) {
      rr.push_back(init.rho(r, c).real());
      ri.push_back(init.rho(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return json{{"re", re}, {"im", im}};
}

}  // namespace detail

/// Builds and validates a config from parsed JSON, filling in defaults.
inline ScenarioConfig config_from_json(const json& j) {
  using namespace detail;
  reject_unknown(j, "", {"name", "description", "model", "light", "initial", "grid", "methods",
                         "output_channels", "n_a"});
  ScenarioConfig c;
  c.name = get_as<std::string>(j, "name", "name");
  if (c.name.empty() || c.name.find_first_of("/\\ ") != std::string::npos)
    throw ConfigError("name", "must be a non-empty file-name-safe string");
  c.description = get_opt<std::string>(j, "description", "description").value_or("");

  if (!j.contains("model")) throw ConfigError("model", "required key is missing");
  const json& m = j.at("model");
  reject_unknown(m, "model", {"kind", "n_atoms", "omega0", "omega_c", "g", "photon_trunc"});
  const std::string kind = get_opt<std::string>(m, "kind", "model.kind").value_or("rabi");
  if (kind == "rabi") {
    c.model.kind = ModelKind::Rabi;
  } else if (kind == "dicke") {
    c.model.kind = ModelKind::Dicke;
  } else {
    throw ConfigError("model.kind", "expected rabi or dicke");
  }
  c.model.n_atoms = m.contains("n_atoms") ? get_count(m, "n_atoms", "model.n_atoms")
                                          : (c.model.kind == ModelKind::Rabi ? 1 : 4);
  c.model.omega0 = get_opt<double>(m, "omega0", "model.omega0").value_or(1.0);
  c.model.omega_c = get_as<double>(m, "omega_c", "model.omega_c");
  c.model.g = get_as<double>(m, "g", "model.g");

  if (!j.contains("light")) throw ConfigError("light", "required key is missing");
  c.light = light_from_json(j.at("light"));
  c.model.photon_trunc = m.contains("photon_trunc") ? get_count(m, "photon_trunc", "model.photon_trunc")
                                                    : default_photon_trunc(c.light);
  validate(c.model);

  c.initial = j.contains("initial") ? initial_from_json(j.at("initial")) : InitialState{};
  (void)initial_density(c.initial, c.model);

  if (j.contains("n_a")) {
    const int n_a = get_as<int>(j, "n_a", "n_a");
    if (n_a != 0 && n_a != 1) throw ConfigError("n_a", "n_a must be 0 or 1");
    c.n_a = n_a;
  }

  const json grid = j.contains("grid") ? j.at("grid") : json::object();
  reject_unknown(grid, "grid", {"t_max", "dt", "output_stride"});
  c.grid.dt = get_opt<double>(grid, "dt", "grid.dt").value_or(default_dt(c.model));
  c.grid.t_max = get_opt<double>(grid, "t_max", "grid.t_max")
                     .value_or(default_t_max(c.model, c.light, c.n_a.value_or(nominal_emission_count(c.initial))));
  c.grid.output_stride = grid.contains("output_stride") ? get_count(grid, "output_stride", "grid.output_stride")
                                                        : default_output_stride(c.grid.t_max, c.grid.dt);
  try {
    validate(c.grid, c.model);
  } catch (const GridError& e) {
    throw ConfigError("grid", e.what());
  }

  if (j.contains("methods")) {
    const auto names = get_as<std::vector<std::string>>(j, "methods", "methods");
    if (names.empty()) throw ConfigError("methods", "at least one method is required");
    for (const auto& n : names) {
      const auto method = parse_method(n);
      if (!method) throw ConfigError("methods", "unknown method '" + n + "'");
      if (std::find(c.methods.begin(), c.methods.end(), *method) != c.methods.end())
        throw ConfigError("methods", "duplicate method '" + n + "'");
      c.methods.push_back(*method);
    }
  } else {
    c.methods = all_methods();
  }

  if (j.contains("output_channels")) {
    c.output_channels = get_as<std::vector<std::string>>(j, "output_channels", "output_channels");
    const auto known = channel_names(c.model);
    for (const auto& ch : c.output_channels)
      if (std::find(known.begin(), known.end(), ch) == known.end())
        throw ConfigError("output_channels", "unknown channel '" + ch + "' for this model");
  }
  return c;
}

/// Fully resolved config; config_from_json(config_to_json(c)) == c.
inline json config_to_json(const ScenarioConfig& c) {
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  json j{
      {"name", c.name},
      {"model",
       {{"kind", to_string(c.model.kind)},
        {"n_atoms", c.model.n_atoms},
        {"omega0", c.model.omega0},
        {"omega_c", c.model.omega_c},
        {"g", c.model.g},
        {"photon_trunc", c.model.photon_trunc}}},
      {"light", detail::light_to_json(c.light)},
      {"initial", detail::initial_to_json(c.initial)},
      {"grid", {{"t_max", c.grid.t_max}, {"dt", c.grid.dt}, {"output_stride", c.grid.output_stride}}},
      {"methods", methods},
      {"output_channels", c.output_channels},
  };
  if (!c.description.empty()) j["description"] = c.description;
  if (c.n_a) j["n_a"] = *c.n_a;
  return j;
}

inline ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError("JSON parse error at line " + std::to_string(line) + ", column " +
                         std::to_string(col) + ": " + e.what(),
                     line, col);
  }
  return config_from_json(j);
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

// ---------------------------------------------------------------------------
// Figure presets

inline ScenarioConfig make_preset(std::string name, std::string caption, ModelKind kind,
                                  double omega_c, double g, LightState light, InitialKind init) {
  json j{{"name", std::move(name)},
         {"description", std::move(caption)},
         {"model",
          {{"kind", to_string(kind)}, {"n_atoms", kind == ModelKind::Rabi ? 1 : 4}, {"omega_c", omega_c}, {"g", g}}},
         {"light", detail::light_to_json(light)},
         {"initial", init == InitialKind::AllGround ? "all_ground" : "all_excited"}};
  return config_from_json(j);
}

/// The thirteen parameter sets of the published figures.
inline std::vector<ScenarioConfig> figure_presets() {
  using K = ModelKind;
  const auto G = InitialKind::AllGround;
  const auto E = InitialKind::AllExcited;
  const double s02 = std::sqrt(0.2), s08 = std::sqrt(0.8), s05 = std::sqrt(0.5);
  return {
      make_preset("fig1A", "Rabi, Fock n=1, ground-initial", K::Rabi, 0.75, 0.01, FockState{1}, G),
      make_preset("fig1B", "Rabi, Fock n=1, ground-initial", K::Rabi, 0.9, 0.01, FockState{1}, G),
      make_preset("fig1C", "Rabi, vacuum, excited-initial", K::Rabi, 0.75, 0.01, FockState{0}, E),
      make_preset("fig1D", "Rabi, vacuum, excited-initial", K::Rabi, 0.9, 0.01, FockState{0}, E),
      make_preset("fig2AC", "Rabi, sqrt(0.2)|0> + sqrt(0.8)|1>", K::Rabi, 0.75, 0.015,
                  FockSuperposition{0, s02, s08}, E),
      make_preset("fig2BD", "Rabi, sqrt(0.5)|4> + sqrt(0.5)|5>", K::Rabi, 0.9, 0.0025,
                  FockSuperposition{4, s05, s05}, E),
      make_preset("fig3A", "Rabi, squeezed vacuum r=0.2", K::Rabi, 0.75, 0.005, SqueezedVacuum{0.2}, E),
      make_preset("fig3B", "Rabi, squeezed vacuum r=0.2", K::Rabi, 0.9, 0.005, SqueezedVacuum{0.2}, E),
      make_preset("fig3C", "Rabi, squeezed vacuum r=1.2", K::Rabi, 0.9, 0.005, SqueezedVacuum{1.2}, E),
      make_preset("fig4A", "Dicke N=4, vacuum, all excited", K::Dicke, 0.75, 0.015, FockState{0}, E),
      make_preset("fig4B", "Dicke N=4, vacuum, all excited", K::Dicke, 0.9, 0.005, FockState{0}, E),
      make_preset("fig4C", "Dicke N=4, Fock n=10, all excited", K::Dicke, 0.75, 0.008, FockState{10}, E),
      make_preset("fig4D", "Dicke N=4, Fock n=10, all excited", K::Dicke, 0.99, 0.0005, FockState{10}, E),
  };
}

inline ScenarioConfig find_preset(const std::string& name) {
  for (auto& p : figure_presets())
    if (p.name == name) return p;
  throw ConfigError("preset", "no figure preset named '" + name + "'");
}

// ---------------------------------------------------------------------------
// Running

struct MethodRun {
  Method method;
  TimeSeries series;
  double wall_seconds = 0.0;
};

struct RunResult {
  ScenarioConfig config;
  std::vector<MethodRun> runs;

  const TimeSeries& series(Method m) const {
    for (const auto& r : runs)
      if (r.method == m) return r.series;
    throw Error("run '" + config.name + "' has no result for method " + to_string(m));
  }
};

inline TimeSeries run_method(const ScenarioConfig& c, Method m, const StateObserver& observer = {}) {
  const DensityMatrix rho0 = initial_density(c.initial, c.model);
  switch (m) {
    case Method::Exact: return propagate_exact(c.model, c.light, rho0, c.grid, observer);
    case Method::Qcme1: return propagate_qcme(c.model, c.light, rho0, c.grid, 1, observer);
    case Method::Qcme2: return propagate_qcme(c.model, c.light, rho0, c.grid, 2, observer);
    case Method::SemiclassicalEcl:
      return propagate_semiclassical(c.model, {FieldChoice::Kind::Ecl, std::nullopt}, c.light, rho0,
                                     c.grid, observer);
    case Method::SemiclassicalEeff:
      return propagate_semiclassical(c.model, {FieldChoice::Kind::Eeff, c.n_a}, c.light, rho0, c.grid,
                                     observer);
  }
  throw Error("unknown method");
}

inline RunResult run_scenario(const ScenarioConfig& c) {
  RunResult result{c, {}};
  for (Method m : c.methods) {
    const auto start = std::chrono::steady_clock::now();
    TimeSeries ts = run_method(c, m);
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    result.runs.push_back({m, std::move(ts), took.count()});
  }
  return result;
}

// ---------------------------------------------------------------------------
// Output

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

/// Writes <dir>/<name>.csv and <dir>/<name>.json; returns the CSV path.
inline std::filesystem::path write_csv(const RunResult& result, const std::filesystem::path& dir) {
  const ScenarioConfig& c = result.config;
  if (result.runs.empty()) throw Error("run '" + c.name + "' has no method results");
  for (Method m : c.methods) (void)result.series(m);
  const auto& times = result.runs.front().series.times;
  if (times.empty()) throw GridError("run '" + c.name + "' has an empty time grid");
  for (const auto& r : result.runs)
    if (r.series.times != times) throw Error("method results are not on a common time grid");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw Error("time grid is not strictly increasing");

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  struct Column {
    std::string header;
    const std::vector<double>* data;
  };
  std::vector<Column> cols;
  for (const auto& r : result.runs) {
    const auto& names = c.output_channels.empty() ? r.series.names : c.output_channels;
    for (const auto& n : names) cols.push_back({to_string(r.method) + "." + n, &r.series.channel(n)});
  }

  const auto csv_path = dir / (c.name + ".csv");
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + csv_path.string());
    out << "t";
    for (const auto& col : cols) out << ',' << col.header;
    out << '\n';
    for (std::size_t k = 0; k < times.size(); ++k) {
      out << format_number(times[k]);
      for (const auto& col : cols) out << ',' << format_number((*col.data)[k]);
      out << '\n';
    }
    if (!out) throw IoError("write failed for " + csv_path.string());
  }

  json meta{{"config", config_to_json(c)},
            {"code_version", kVersion},
            {"photon_trunc", c.model.photon_trunc},
            {"dt", c.grid.dt},
            {"n_samples", times.size()},
            {"primary_channel", primary_channel(c)}};
  json columns = json::array({"t"});
  for (const auto& col : cols) columns.push_back(col.header);
  meta["columns"] = columns;
  json wall = json::object();
  json warnings = json::array();
  for (const auto& r : result.runs) {
    wall[to_string(r.method)] = r.wall_seconds;
    for (const auto& w : r.series.warnings) warnings.push_back(to_string(r.method) + ": " + w);
  }
  meta["wall_time_seconds"] = wall;
  meta["warnings"] = warnings;

  const auto meta_path = dir / (c.name + ".json");
  std::ofstream mo(meta_path);
  if (!mo) throw IoError("cannot write " + meta_path.string());
  mo << meta.dump(2) << '\n';
  if (!mo) throw IoError("write failed for " + meta_path.string());
  return csv_path;
}

}  // namespace qcme
