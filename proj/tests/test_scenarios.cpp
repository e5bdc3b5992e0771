#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qcme/metrics.hpp"
#include "qcme/scenario.hpp"

using namespace qcme;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "name": "minimal",
  "model": {"omega_c": 0.75, "g": 0.01},
  "light": {"type": "fock", "n": 0}
})";

json minimal() { return json::parse(kMinimal); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qcme_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string config_error_key(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

ScenarioConfig short_run(std::vector<Method> methods) {
  json j = minimal();
  j["grid"] = {{"t_max", 5.0}, {"output_stride", 5}};
  ScenarioConfig c = config_from_json(j);
  c.methods = std::move(methods);
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QCME_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, MinimalGetsDefaults) {
  const ScenarioConfig c = parse_config(kMinimal);
  EXPECT_EQ(c.model.kind, ModelKind::Rabi);
  EXPECT_EQ(c.model.n_atoms, 1u);
  EXPECT_EQ(c.model.omega0, 1.0);
  EXPECT_EQ(c.model.photon_trunc, 20u);
  EXPECT_EQ(c.initial.kind, InitialKind::AllExcited);
  EXPECT_EQ(c.methods, all_methods());
  EXPECT_EQ(c.grid.dt, default_dt(c.model));
  EXPECT_GT(c.grid.t_max, 0.0);
  EXPECT_GE(c.grid.output_stride, 1u);
  EXPECT_LE(c.grid.n_samples(), kTargetSamples + 1);
  EXPECT_TRUE(c.output_channels.empty());
}

TEST(Config, NegativeCouplingRejected) {
  json j = minimal();
  j["model"]["g"] = -0.01;
  try {
    config_from_json(j);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "model.g");
    EXPECT_NE(std::string(e.what()).find("g >= 0"), std::string::npos);
  }
}

TEST(Config, EmptyMethodsRejected) {
  json j = minimal();
  j["methods"] = json::array();
  EXPECT_EQ(config_error_key(j), "methods");
  j["methods"] = {"exact", "exact"};
  EXPECT_EQ(config_error_key(j), "methods");
  j["methods"] = {"magic"};
  EXPECT_EQ(config_error_key(j), "methods");
}

TEST(Config, UnknownKeysRejectedAtEveryLevel) {
  json j = minimal();
  j["colour"] = "red";
  EXPECT_EQ(config_error_key(j), "colour");
  j = minimal();
  j["model"]["dipole"] = 1;
  EXPECT_EQ(config_error_key(j), "model.dipole");
  j = minimal();
  j["light"]["phase"] = 0.1;
  EXPECT_EQ(config_error_key(j), "light.phase");
  j = minimal();
  j["grid"] = {{"t0", 0.0}};
  EXPECT_EQ(config_error_key(j), "grid.t0");
}

TEST(Config, InvalidValuesNameTheKey) {
  json j = minimal();
  j["model"]["kind"] = "dimer";
  EXPECT_EQ(config_error_key(j), "model.kind");
  j = minimal();
  j["model"]["kind"] = "rabi";
  j["model"]["n_atoms"] = 2;
  EXPECT_EQ(config_error_key(j), "model.n_atoms");
  j = minimal();
  j["light"] = {{"type", "fock_superposition"}, {"n", 0}, {"c_n", 0.5}, {"c_np1", 0.5}};
  EXPECT_EQ(config_error_key(j), "light");
  j = minimal();
  j["grid"] = {{"dt", 1.0}};
  EXPECT_EQ(config_error_key(j), "grid");
  j = minimal();
  j["model"]["photon_trunc"] = -3;
  EXPECT_EQ(config_error_key(j), "model.photon_trunc");
  j = minimal();
  j["model"]["g"] = "strong";
  EXPECT_EQ(config_error_key(j), "model.g");
  j = minimal();
  j.erase("light");
  EXPECT_EQ(config_error_key(j), "light");
  j = minimal();
  j["output_channels"] = {"P_e_1"};
  EXPECT_EQ(config_error_key(j), "output_channels");
  j = minimal();
  j["n_a"] = 3;
  EXPECT_EQ(config_error_key(j), "n_a");
  j = minimal();
  j["initial"] = "half";
  EXPECT_EQ(config_error_key(j), "initial");
  j = minimal();
  j["initial"] = {{"re", {{0.5, 0.0}, {0.0, 0.6}}}};
  EXPECT_EQ(config_error_key(j), "initial");
}

TEST(Config, ParseErrorCarriesPosition) {
  try {
    parse_config("{\n  \"name\": \"x\",\n  \"model\": {,}\n}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 13u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Config, ExplicitInitialState) {
  json j = minimal();
  j["initial"] = {{"re", {{0.5, 0.5}, {0.5, 0.5}}}, {"im", {{0.0, 0.0}, {0.0, 0.0}}}};
  j["n_a"] = 1;
  const ScenarioConfig c = config_from_json(j);
  EXPECT_EQ(c.initial.kind, InitialKind::Explicit);
  EXPECT_NEAR(initial_density(c.initial, c.model).purity(), 1.0, 1e-15);
}

TEST(Config, TruncationDefaultCoversLightState) {
  json j = minimal();
  j["light"] = {{"type", "fock"}, {"n", 10}};
  EXPECT_EQ(config_from_json(j).model.photon_trunc, 60u);
  j["light"] = {{"type", "squeezed_vacuum"}, {"r", 1.2}};
  const auto c = config_from_json(j);
  EXPECT_NO_THROW(state_vector(c.light, c.model.photon_trunc));
  j["model"]["photon_trunc"] = 7;
  EXPECT_EQ(config_from_json(j).model.photon_trunc, 7u);
}

TEST(Config, RoundTripIsIdentity) {
  json j = minimal();
  j["model"]["kind"] = "dicke";
  j["model"]["n_atoms"] = 3;
  j["light"] = {{"type", "fock_superposition"}, {"n", 4}, {"c_n", std::sqrt(0.5)}, {"c_np1", std::sqrt(0.5)}};
  j["initial"] = "all_ground";
  j["methods"] = {"qcme2", "exact"};
  j["output_channels"] = {"P_g_2"};
  j["description"] = "round trip";
  for (const ScenarioConfig& c : [&] {
         auto all = figure_presets();
         all.push_back(config_from_json(j));
         return all;
       }()) {
    const ScenarioConfig back = parse_config(config_to_json(c).dump());
    EXPECT_EQ(back, c) << c.name;
    EXPECT_EQ(config_to_json(back), config_to_json(c));
  }
}

TEST(Config, LoadFromFile) {
  const fs::path dir = scratch("load");
  std::ofstream(dir / "c.json") << kMinimal;
  EXPECT_EQ(load_config(dir / "c.json"), parse_config(kMinimal));
  EXPECT_THROW(load_config(dir / "missing.json"), IoError);
}

TEST(Presets, ThirteenCaptionParameterSets) {
  const auto presets = figure_presets();
  ASSERT_EQ(presets.size(), 13u);
  struct Row {
    const char* name;
    ModelKind kind;
    double wc, g;
  };
  const Row rows[] = {{"fig1A", ModelKind::Rabi, 0.75, 0.01},   {"fig1B", ModelKind::Rabi, 0.9, 0.01},
                      {"fig1C", ModelKind::Rabi, 0.75, 0.01},   {"fig1D", ModelKind::Rabi, 0.9, 0.01},
                      {"fig2AC", ModelKind::Rabi, 0.75, 0.015}, {"fig2BD", ModelKind::Rabi, 0.9, 0.0025},
                      {"fig3A", ModelKind::Rabi, 0.75, 0.005},  {"fig3B", ModelKind::Rabi, 0.9, 0.005},
                      {"fig3C", ModelKind::Rabi, 0.9, 0.005},   {"fig4A", ModelKind::Dicke, 0.75, 0.015},
                      {"fig4B", ModelKind::Dicke, 0.9, 0.005},  {"fig4C", ModelKind::Dicke, 0.75, 0.008},
                      {"fig4D", ModelKind::Dicke, 0.99, 0.0005}};
  for (std::size_t k = 0; k < 13; ++k) {
    const auto& p = presets[k];
    EXPECT_EQ(p.name, rows[k].name);
    EXPECT_EQ(p.model.kind, rows[k].kind);
    EXPECT_EQ(p.model.omega_c, rows[k].wc) << p.name;
    EXPECT_EQ(p.model.g, rows[k].g) << p.name;
    EXPECT_EQ(p.model.omega0, 1.0);
    EXPECT_EQ(p.model.n_atoms, rows[k].kind == ModelKind::Dicke ? 4u : 1u);
  }
}

TEST(Presets, LightStatesAndInitialConditions) {
  EXPECT_EQ(std::get<FockState>(find_preset("fig1A").light).n, 1u);
  EXPECT_EQ(find_preset("fig1A").initial.kind, InitialKind::AllGround);
  EXPECT_EQ(find_preset("fig1B").initial.kind, InitialKind::AllGround);
  EXPECT_EQ(std::get<FockState>(find_preset("fig1C").light).n, 0u);
  EXPECT_EQ(find_preset("fig1C").initial.kind, InitialKind::AllExcited);
  const auto s2 = std::get<FockSuperposition>(find_preset("fig2AC").light);
  EXPECT_EQ(s2.n, 0u);
  EXPECT_EQ(s2.c_n, std::sqrt(0.2));
  EXPECT_EQ(s2.c_np1, std::sqrt(0.8));
  const auto s4 = std::get<FockSuperposition>(find_preset("fig2BD").light);
  EXPECT_EQ(s4.n, 4u);
  EXPECT_EQ(s4.c_n, std::sqrt(0.5));
  EXPECT_EQ(std::get<SqueezedVacuum>(find_preset("fig3A").light).r, 0.2);
  EXPECT_EQ(std::get<SqueezedVacuum>(find_preset("fig3C").light).r, 1.2);
  EXPECT_EQ(std::get<FockState>(find_preset("fig4D").light).n, 10u);
  for (const auto& p : figure_presets()) {
    if (p.name.rfind("fig1A", 0) == 0 || p.name.rfind("fig1B", 0) == 0) continue;
    EXPECT_EQ(p.initial.kind, InitialKind::AllExcited) << p.name;
  }
  EXPECT_THROW(find_preset("fig5"), ConfigError);
}

TEST(Presets, WindowCoversEightExchangePeriods) {
  for (const auto& p : figure_presets()) {
    const double nbar = mean_photon_number(p.light);
    const double n_a = p.initial.kind == InitialKind::AllGround ? 0.0 : 1.0;
    const double d = p.model.detuning();
    const double omega = std::sqrt(d * d + 4.0 * p.model.g * p.model.g * p.model.n_atoms * (nbar + n_a));
    EXPECT_GE(p.grid.t_max, 8.0 * 2.0 * std::numbers::pi / omega) << p.name;
    EXPECT_LT(p.grid.t_max, 8.0 * 2.0 * std::numbers::pi / omega + 10.0) << p.name;
    EXPECT_NO_THROW(validate(p.grid, p.model));
  }
}

TEST(Presets, PrimaryChannel) {
  EXPECT_EQ(primary_channel(find_preset("fig1A")), "P_e");
  EXPECT_EQ(primary_channel(find_preset("fig1C")), "P_g");
  EXPECT_EQ(primary_channel(find_preset("fig4A")), "P_g_1");
}

TEST(Csv, ColumnsAndFormat) {
  ScenarioConfig c = short_run({Method::Exact, Method::Qcme2});
  c.output_channels = {"P_e", "P_g"};
  const auto dir = scratch("columns");
  const fs::path path = write_csv(run_scenario(c), dir);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header, "t,exact.P_e,exact.P_g,qcme2.P_e,qcme2.P_g");
  std::getline(in, row);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 4);
  EXPECT_EQ(row.substr(0, 2), "0,");
  double prev = -1.0;
  std::size_t rows = 1;
  for (in.seekg(0), std::getline(in, header); std::getline(in, row); ++rows) {
    const double t = std::stod(row.substr(0, row.find(',')));
    EXPECT_GT(t, prev);
    prev = t;
  }
  EXPECT_EQ(rows - 1, c.grid.n_samples());
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333333");
}

TEST(Csv, AllChannelsByDefaultAndMetadata) {
  const ScenarioConfig c = short_run({Method::SemiclassicalEcl});
  const auto dir = scratch("meta");
  write_csv(run_scenario(c), dir);
  std::ifstream in(dir / "minimal.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header,
            "t,semiclassical_ecl.P_e,semiclassical_ecl.P_g,semiclassical_ecl.Re_rho_eg,semiclassical_ecl.Im_rho_eg");
  const json meta = json::parse(slurp(dir / "minimal.json"));
  EXPECT_EQ(config_from_json(meta.at("config")), c);
  EXPECT_EQ(meta.at("photon_trunc"), c.model.photon_trunc);
  EXPECT_EQ(meta.at("code_version"), kVersion);
  EXPECT_TRUE(meta.at("wall_time_seconds").contains("semiclassical_ecl"));
  EXPECT_EQ(meta.at("columns").size(), 5u);
}

TEST(Csv, DeterministicBytes) {
  const ScenarioConfig c = short_run(all_methods());
  const auto a = scratch("det_a"), b = scratch("det_b");
  write_csv(run_scenario(c), a);
  write_csv(run_scenario(c), b);
  EXPECT_EQ(slurp(a / "minimal.csv"), slurp(b / "minimal.csv"));
}

TEST(Csv, EmptyGridRejected) {
  const ScenarioConfig c = short_run({Method::Exact});
  RunResult r{c, {{Method::Exact, TimeSeries{}, 0.0}}};
  const auto dir = scratch("empty");
  EXPECT_THROW(write_csv(r, dir), GridError);
  EXPECT_FALSE(fs::exists(dir / "minimal.csv"));
  RunResult none{c, {}};
  EXPECT_THROW(write_csv(none, dir), Error);
}

TEST(Csv, UnwritablePathSurfacesPath) {
  const ScenarioConfig c = short_run({Method::Exact});
  const auto dir = scratch("blocked");
  std::ofstream(dir / "file") << "x";
  try {
    write_csv(run_scenario(c), dir / "file" / "sub");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("file"), std::string::npos);
  }
}

TEST(Runner, EveryRequestedMethodPresent) {
  const ScenarioConfig c = short_run({Method::Qcme1, Method::SemiclassicalEeff});
  const RunResult r = run_scenario(c);
  ASSERT_EQ(r.runs.size(), 2u);
  EXPECT_NO_THROW(r.series(Method::Qcme1));
  EXPECT_THROW(r.series(Method::Exact), Error);
  EXPECT_EQ(r.series(Method::Qcme1).times, r.series(Method::SemiclassicalEeff).times);
}

TEST(Runner, EffectiveFieldOverride) {
  json j = minimal();
  j["grid"] = {{"t_max", 50.0}};
  j["initial"] = "all_ground";
  j["methods"] = {"semiclassical_eeff"};
  const auto ground_run = run_scenario(config_from_json(j));
  EXPECT_EQ(ground_run.runs[0].series.warnings.size(), 1u);
  j["n_a"] = 1;
  const auto forced = run_scenario(config_from_json(j));
  EXPECT_TRUE(forced.runs[0].series.warnings.empty());
  EXPECT_GT(peak_to_peak(forced.runs[0].series.channel("P_e")), 1e-4);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  json good = minimal();
  good["grid"] = {{"t_max", 5.0}};
  std::ofstream(dir / "good.json") << good.dump();
  json bad = minimal();
  bad["model"]["g"] = -1.0;
  std::ofstream(dir / "bad.json") << bad.dump();
  std::ofstream(dir / "broken.json") << "{ \"name\": ";

  EXPECT_EQ(run_cli("run --config " + (dir / "good.json").string() + " --out " + (dir / "out").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "minimal.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "minimal.json"));
  EXPECT_EQ(run_cli("run --config " + (dir / "bad.json").string() + " --out " + (dir / "out").string()), 1);
  EXPECT_EQ(run_cli("run --config " + (dir / "broken.json").string() + " --out " + (dir / "out").string()), 1);
  EXPECT_EQ(run_cli("run --config " + (dir / "none.json").string() + " --out " + (dir / "out").string()), 2);
  EXPECT_EQ(run_cli("run --out " + (dir / "out").string()), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli(""), 2);
}

TEST(Cli, FiguresSubsetInParallel) {
  const auto dir = scratch("figures");
  EXPECT_EQ(run_cli("figures --out " + dir.string() + " --jobs 2 --only fig1A fig3A"), 0);
  for (const char* n : {"fig1A", "fig3A"}) {
    EXPECT_TRUE(fs::exists(dir / (std::string(n) + ".csv")));
    const json meta = json::parse(slurp(dir / (std::string(n) + ".json")));
    EXPECT_EQ(meta.at("config").at("name"), n);
  }
  EXPECT_EQ(run_cli("figures --out " + dir.string() + " --only nothing"), 1);
}
