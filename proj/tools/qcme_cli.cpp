// qcme command-line front end: run one scenario, regenerate every figure
// preset, or execute the validation suite.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "qcme/scenario.hpp"
#include "qcme/validation.hpp"

namespace {

enum Exit { kOk = 0, kFailed = 1, kUsage = 2 };

int run_config(const std::string& config, const std::string& out_dir) {
  const qcme::ScenarioConfig c = qcme::load_config(config);
  const auto result = qcme::run_scenario(c);
  const auto path = qcme::write_csv(result, out_dir);
  std::cout << path.string() << '\n';
  for (const auto& r : result.runs)
    for (const auto& w : r.series.warnings) std::cerr << "warning: " << qcme::to_string(r.method) << ": " << w << '\n';
  return kOk;
}

int run_figures(const std::string& out_dir, unsigned jobs, const std::vector<std::string>& only) {
  std::vector<qcme::ScenarioConfig> presets;
  for (auto& p : qcme::figure_presets())
    if (only.empty() || std::find(only.begin(), only.end(), p.name) != only.end()) presets.push_back(p);
  if (presets.empty()) throw qcme::ConfigError("preset", "no matching presets");

  std::atomic<std::size_t> next{0};
  std::mutex io;
  std::vector<std::string> errors;
  const auto worker = [&] {
    for (std::size_t i; (i = next++) < presets.size();) {
      try {
        const auto path = qcme::write_csv(qcme::run_scenario(presets[i]), out_dir);
        std::lock_guard lock(io);
        std::cout << path.string() << '\n';
      } catch (const std::exception& e) {
        std::lock_guard lock(io);
        errors.push_back(presets[i].name + ": " + e.what());
      }
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(presets.size()));
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < jobs; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& e : errors) std::cerr << "error: " << e << '\n';
  return errors.empty() ? kOk : kFailed;
}

int run_validate(bool quick, std::optional<std::size_t> trunc, const std::vector<std::string>& only,
                 const std::string& report_path) {
  qcme::ValidationOptions opt;
  opt.quick = quick;
  opt.truncation_override = trunc;
  opt.only = only;
  const auto rep = qcme::run_validation(opt);
  for (const auto& c : rep.checks)
    std::cerr << (c.passed ? "PASS " : (c.informational ? "INFO " : "FAIL ")) << c.name << ": " << c.detail << '\n';
  const std::string text = rep.to_json().dump(2);
  if (report_path.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream out(report_path);
    if (!out) throw qcme::IoError("cannot write report " + report_path);
    out << text << '\n';
  }
  std::cerr << rep.failures() << " failing check(s) of " << rep.checks.size() << '\n';
  return rep.passed() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Molecular dynamics under quantum light: exact, master-equation and semiclassical propagation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", qcme::kVersion);

  std::string config, out_dir = "out", report;
  auto* run = app.add_subcommand("run", "Run one scenario from a JSON config");
  run->add_option("--config", config, "Scenario config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory")->required();

  unsigned jobs = 0;
  std::vector<std::string> only;
  auto* figures = app.add_subcommand("figures", "Run every figure preset and write CSV + JSON");
  figures->add_option("--out", out_dir, "Output directory")->required();
  figures->add_option("--jobs", jobs, "Parallel workers (0: one per core)");
  figures->add_option("--only", only, "Restrict to the named presets");

  bool quick = false;
  std::optional<std::size_t> trunc;
  auto* validate = app.add_subcommand("validate", "Run the self-check suite");
  validate->add_flag("--quick", quick, "Rabi presets only, shorter sweeps");
  validate->add_option("--report", report, "Write the JSON report here instead of stdout");
  validate->add_option("--truncation", trunc, "Force this photon cutoff in the truncation checks");
  std::vector<std::string> validate_only;
  validate->add_option("--only", validate_only, "Restrict the preset checks to the named presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return run_config(config, out_dir);
    if (*figures) return run_figures(out_dir, jobs, only);
    if (*validate) return run_validate(quick, trunc, validate_only, report);
  } catch (const qcme::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}
