#pragma once

// Self-check suite behind `qcme validate`: invariants of every module, the
// oracle cross-checks and the per-preset accuracy comparisons. Produces a
// machine-readable report.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qcme/metrics.hpp"
#include "qcme/scenario.hpp"

namespace qcme {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
  bool informational = false;  // reported, never fails the run
};

struct ValidationReport {
  std::vector<Check> checks;
  double wall_seconds = 0.0;

  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& c : checks)
      if (!c.passed && !c.informational) ++n;
    return n;
  }
  bool passed() const { return failures() == 0; }

  const Check* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  json to_json() const {
    json arr = json::array();
    for (const auto& c : checks)
      arr.push_back({{"name", c.name}, {"passed", c.passed}, {"informational", c.informational},
                     {"detail", c.detail}});
    return {{"passed", passed()},
            {"failures", failures()},
            {"checks", arr},
            {"wall_time_seconds", wall_seconds},
            {"code_version", kVersion}};
  }
};

struct ValidationOptions {
  bool quick = false;                            // Rabi presets only, shorter sweeps
  std::optional<std::size_t> truncation_override;  // forced cutoff for the truncation checks
  std::vector<std::string> only;                   // restrict preset checks to these names
};

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline Check bounded(std::string name, double value, double limit, std::string what,
                     bool informational = false) {
  const bool ok = std::isfinite(value) && value <= limit;
  return {std::move(name), ok, what + " = " + sci(value) + " (limit " + sci(limit) + ")", informational};
}

inline Check at_least(std::string name, double value, double limit, std::string what,
                      bool informational = false) {
  const bool ok = std::isfinite(value) && value >= limit;
  return {std::move(name), ok, what + " = " + sci(value) + " (required >= " + sci(limit) + ")",
          informational};
}

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Reusable measurements

struct KernelDeviation {
  double mean = 0.0;
  double sym = 0.0;
  double antisym = 0.0;
  double chi = 0.0;  // |2 * oracle antisym - response_kernel|
  double max() const { return std::max({mean, sym, antisym}); }
};

/// Closed forms against corr_oracle on an n x n grid over [0, t_max]^2.
inline KernelDeviation kernel_oracle_deviation(const LightState& state, double g, double omega_c,
                                               std::size_t trunc, std::size_t n = 20,
                                               double t_max = 50.0) {
  const CorrelationOracle oracle(state, g, omega_c, trunc);
  const auto ts = detail::uniform_grid(0.0, t_max, n);
  KernelDeviation d;
  for (double t : ts)
    for (double tp : ts) {
      const CorrelationSample s = oracle(t, tp);
      d.mean = std::max(d.mean, std::abs(s.mean_t - mean_field(state, g, omega_c, t)));
      d.sym = std::max(d.sym, std::abs(s.sym - sym_corr(state, g, omega_c, t, tp)));
      d.antisym = std::max(d.antisym, std::abs(s.antisym - antisym_corr(g, omega_c, t, tp)));
      d.chi = std::max(d.chi, std::abs(2.0 * s.antisym - response_kernel(g, omega_c, t, tp)));
    }
  return d;
}

/// Smallest cutoff (from `start`, steps of 10) at which doubling it changes the oracle
/// output by at most `tolerance` on the check grid. Independent of the closed forms.
inline std::size_t converged_oracle_truncation(const LightState& state, double g, double omega_c,
                                               std::size_t start = 60, double tolerance = 1e-11) {
  if (auto top = max_occupied_level(state)) start = std::max(start, *top + 10);
  const auto ts = detail::uniform_grid(0.0, 50.0, 20);
  for (std::size_t trunc = minimal_truncation(state, start);; trunc += 10) {
    const CorrelationOracle lo(state, g, omega_c, trunc);
    const CorrelationOracle hi(state, g, omega_c, 2 * trunc);
    double change = 0.0;
    for (double t : ts)
      for (double tp : ts) {
        const auto a = lo(t, tp), b = hi(t, tp);
        change = std::max({change, std::abs(a.sym - b.sym), std::abs(a.antisym - b.antisym),
                           std::abs(a.mean_t - b.mean_t)});
      }
    if (change <= tolerance) return trunc;
    if (trunc > 1000) throw TruncationError("oracle does not converge for " + describe(state));
  }
}

/// Light states whose kernels are cross-checked against the oracle.
inline std::vector<LightState> kernel_check_states() {
  return {FockState{0},
          FockState{1},
          FockState{4},
          FockState{5},
          FockState{10},
          FockSuperposition{0, std::sqrt(0.2), std::sqrt(0.8)},
          FockSuperposition{4, std::sqrt(0.5), std::sqrt(0.5)},
          SqueezedVacuum{0.2},
          SqueezedVacuum{1.2}};
}

/// Grid with the same step and sampling but a shorter window.
inline PropagationGrid shortened(const PropagationGrid& grid, double t_max) {
  PropagationGrid g = grid;
  g.t_max = std::min(grid.t_max, t_max);
  return g;
}

/// Largest change of any channel of the exact run when the photon cutoff is doubled.
inline double truncation_doubling_change(ScenarioConfig c, std::size_t trunc, double window) {
  c.grid = shortened(c.grid, window);
  const DensityMatrix rho0 = initial_density(c.initial, c.model);
  c.model.photon_trunc = trunc;
  const TimeSeries a = propagate_exact(c.model, c.light, rho0, c.grid);
  c.model.photon_trunc = 2 * trunc;
  const TimeSeries b = propagate_exact(c.model, c.light, rho0, c.grid);
  return max_series_difference(a, b);
}

struct ExactIntegrity {
  double trace = 0.0;
  double purity = 0.0;
  double energy = 0.0;
  double hermiticity = 0.0;
  double reduced_trace = 0.0;
  double max() const { return std::max({trace, purity, energy, hermiticity, reduced_trace}); }
};

/// Conservation errors of the exact propagator on every output sample (energy relative to |E0|).
inline ExactIntegrity exact_integrity(const ScenarioConfig& c) {
  const ExactPropagator prop(c.model, c.light, initial_density(c.initial, c.model));
  const auto d0 = prop.diagnostics(0.0);
  const double escale = std::max(1.0, std::abs(d0.energy));
  ExactIntegrity out;
  for (std::size_t step = 0; step <= c.grid.last_step(); step += c.grid.output_stride) {
    const auto d = prop.diagnostics(c.grid.time(step));
    out.trace = std::max(out.trace, std::abs(d.trace - 1.0));
    out.purity = std::max(out.purity, std::abs(d.purity - d0.purity));
    out.energy = std::max(out.energy, std::abs(d.energy - d0.energy) / escale);
    out.hermiticity = std::max(out.hermiticity, d.reduced_hermiticity_error);
    out.reduced_trace = std::max(out.reduced_trace, std::abs(d.reduced_trace - 1.0));
  }
  return out;
}

/// Largest change of a population channel of QCME2 when dt is halved (sampling times kept).
inline double dt_halving_change(const ScenarioConfig& c, int order = 2) {
  const DensityMatrix rho0 = initial_density(c.initial, c.model);
  const TimeSeries a = propagate_qcme(c.model, c.light, rho0, c.grid, order);
  PropagationGrid fine = c.grid;
  fine.dt = c.grid.dt / 2.0;
  fine.output_stride = 2 * c.grid.output_stride;
  const TimeSeries b = propagate_qcme(c.model, c.light, rho0, fine, order);
  const std::size_t n = std::min(a.times.size(), b.times.size());
  double worst = 0.0;
  for (std::size_t ch = 0; ch < a.names.size(); ++ch) {
    if (a.names[ch].rfind("P_", 0) != 0) continue;
    const auto& x = a.values[ch];
    const auto& y = b.channel(a.names[ch]);
    for (std::size_t k = 0; k < n; ++k) {
      if (a.times[k] != b.times[k]) throw Error("dt halving produced misaligned sample times");
      worst = std::max(worst, std::abs(x[k] - y[k]));
    }
  }
  return worst;
}

/// max_t |P_QCME2 - P_exact| on the primary channel.
inline double qcme_max_error(const ScenarioConfig& c) {
  const auto ch = primary_channel(c);
  const DensityMatrix rho0 = initial_density(c.initial, c.model);
  const TimeSeries ex = propagate_exact(c.model, c.light, rho0, c.grid);
  const TimeSeries q = propagate_qcme(c.model, c.light, rho0, c.grid, 2);
  return max_abs_difference(q.channel(ch), ex.channel(ch));
}

/// Ratio of the QCME2 error at g to the error at g/2 on the same grid.
inline double weak_coupling_ratio(const ScenarioConfig& c) {
  ScenarioConfig half = c;
  half.model.g = c.model.g / 2.0;
  return qcme_max_error(c) / qcme_max_error(half);
}

/// One-step disagreement between QCME2 fed the covariance E(t)E(t') of a cosine drive
/// and the +/-E ensemble of semiclassical runs. Returns the deviations at the step sizes
/// h and h/2.
inline std::pair<double, double> semiclassical_equivalence_step(const ModelSpec& spec, double amplitude,
                                                                double h) {
  const auto deviation = [&](double dt) {
    const PropagationGrid grid{dt, dt, 1};
    const auto d = static_cast<Eigen::Index>(spec.molecular_dim());
    CMatrix rho = CMatrix::Zero(d, d);
    rho(0, 0) = 0.75;
    rho(d - 1, d - 1) = 0.25;
    rho(0, d - 1) = rho(d - 1, 0) = 0.25;
    const DensityMatrix rho0(Operator(rho, spec.molecular_dims()));
    const double wc = spec.omega_c;
    const auto kernels = FieldKernels::deterministic_covariance(amplitude, wc);
    const TimeSeries q = propagate_qcme(spec, kernels, rho0, grid, 2);
    const TimeSeries plus =
        propagate_driven(spec, [=](double t) { return amplitude * std::cos(wc * t); }, rho0, grid);
    const TimeSeries minus =
        propagate_driven(spec, [=](double t) { return -amplitude * std::cos(wc * t); }, rho0, grid);
    double worst = 0.0;
    for (std::size_t ch = 0; ch < q.names.size(); ++ch) {
      const double avg = 0.5 * (plus.values[ch].back() + minus.values[ch].back());
      worst = std::max(worst, std::abs(q.values[ch].back() - avg));
    }
    return worst;
  };
  return {deviation(h), deviation(h / 2.0)};
}

struct StateInvariants {
  double trace = 0.0;
  double hermiticity = 0.0;
  StateObserver observer() {
    return [this](double, const CMatrix& rho) {
      trace = std::max(trace, std::abs(rho.trace() - 1.0));
      hermiticity = std::max(hermiticity, max_abs(rho - rho.adjoint()));
    };
  }
};

struct PresetRun {
  RunResult result;
  std::map<Method, StateInvariants> invariants;
};

inline PresetRun run_preset_checked(const ScenarioConfig& c) {
  PresetRun out{{c, {}}, {}};
  for (Method m : c.methods) {
    StateInvariants& inv = out.invariants[m];
    const auto start = std::chrono::steady_clock::now();
    TimeSeries ts = run_method(c, m, inv.observer());
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    out.result.runs.push_back({m, std::move(ts), took.count()});
  }
  return out;
}

/// Largest spread between corresponding site channels of a Dicke run.
inline double site_spread(const TimeSeries& ts, std::size_t n_atoms) {
  double worst = 0.0;
  for (const char* level : {"P_e_", "P_g_"}) {
    const auto& ref = ts.channel(level + std::string("1"));
    for (std::size_t i = 2; i <= n_atoms; ++i)
      worst = std::max(worst, max_abs_difference(ref, ts.channel(level + std::to_string(i))));
  }
  return worst;
}

inline bool ordering_is_claimed(const std::string& preset) {
  return preset.rfind("fig1", 0) == 0 || preset.rfind("fig4", 0) == 0;
}

// ---------------------------------------------------------------------------

inline ValidationReport run_validation(const ValidationOptions& opt = {}) {
  using detail::at_least;
  using detail::bounded;
  using detail::sci;
  const auto start = std::chrono::steady_clock::now();
  ValidationReport rep;
  auto& out = rep.checks;
  const auto guarded = [&](const std::string& name, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("error: ") + e.what(), false});
    }
  };

  // light ------------------------------------------------------------------
  guarded("light.kernel_symmetry", [&] {
    std::mt19937 rng(20240917);
    std::uniform_real_distribution<double> u(0.0, 200.0);
    double closed = 0.0, oracle_dev = 0.0;
    for (const auto& s : kernel_check_states()) {
      const std::size_t trunc = minimal_truncation(s, 60);
      const CorrelationOracle oracle(s, 1.0, 0.9, trunc);
      for (int k = 0; k < 1000; ++k) {
        const double t = u(rng), tp = u(rng);
        closed = std::max({closed, std::abs(sym_corr(s, 1.0, 0.9, t, tp) - sym_corr(s, 1.0, 0.9, tp, t)),
                           std::abs(antisym_corr(1.0, 0.9, t, tp) + antisym_corr(1.0, 0.9, tp, t))});
        if (k < 100) {
          const auto a = oracle(t, tp), b = oracle(tp, t);
          oracle_dev = std::max({oracle_dev, std::abs(a.sym - b.sym), std::abs(a.antisym + b.antisym)});
        }
      }
    }
    out.push_back({"light.kernel_symmetry", closed == 0.0 && oracle_dev <= 1e-10,
                   "closed-form asymmetry " + sci(closed) + " (exact 0), oracle " + sci(oracle_dev) +
                       " (limit 1e-10)"});
  });

  for (const auto& s : kernel_check_states()) {
    const std::string name = "light.oracle_equivalence." + describe(s);
    guarded(name, [&] {
      const std::size_t trunc = converged_oracle_truncation(s, 1.0, 0.9);
      const auto d = kernel_oracle_deviation(s, 1.0, 0.9, trunc);
      out.push_back(bounded(name, d.max(), 1e-8,
                            "max closed-form vs oracle deviation (g = 1, trunc " + std::to_string(trunc) + ")"));
      out.push_back(bounded("light.chi_identification." + describe(s), d.chi, 1e-10,
                            "|2 A_oracle - chi|"));
    });
  }

  guarded("light.stationarity", [&] {
    double fock = 0.0;
    const double shift = 3.7;
    for (const auto& s : kernel_check_states()) {
      if (std::holds_alternative<SqueezedVacuum>(s)) continue;
      for (double t : {0.0, 1.3, 17.0})
        for (double tp : {0.0, 2.2, 41.0})
          fock = std::max(fock, std::abs(sym_corr(s, 1.0, 0.75, t, tp) -
                                         sym_corr(s, 1.0, 0.75, t + shift, tp + shift)));
    }
    const LightState sq = SqueezedVacuum{0.2};
    const double moved = std::abs(sym_corr(sq, 1.0, 0.75, 0.0, 0.0) - sym_corr(sq, 1.0, 0.75, 2.0, 2.0));
    out.push_back({"light.stationarity", fock < 1e-12 && moved > 1e-3,
                   "Fock/superposition shift change " + sci(fock) + ", squeezed r=0.2 shift change " +
                       sci(moved) + " (must be non-zero)"});
  });

  guarded("light.nonclassicality", [&] {
    double worst_s = 0.0, worst_n = 0.0, q_max = -1e300;
    for (const auto& s : kernel_check_states()) {
      const auto psi = state_vector(s, converged_oracle_truncation(s, 1.0, 0.9));
      const auto m = photon_moments(psi);
      if (const auto* sq = std::get_if<SqueezedVacuum>(&s)) {
        worst_s = std::max(worst_s, std::abs(m.squeezing + 0.5 * (1.0 - std::exp(-2.0 * sq->r))));
        worst_n = std::max(worst_n, std::abs(m.mean_n - std::pow(std::sinh(sq->r), 2)));
      } else if (std::holds_alternative<FockSuperposition>(s)) {
        q_max = std::max(q_max, m.mandel_q);
      }
    }
    out.push_back({"light.nonclassicality", worst_s <= 1e-8 && worst_n <= 1e-8 && q_max < 0.0,
                   "squeezing S error " + sci(worst_s) + ", <n> error " + sci(worst_n) +
                       ", largest superposition Mandel Q " + sci(q_max) + " (must be < 0)"});
  });

  // presets ------------------------------------------------------------------
  std::vector<ScenarioConfig> presets;
  for (auto& p : figure_presets())
    if (opt.only.empty() ? (!opt.quick || p.model.kind == ModelKind::Rabi)
                         : std::find(opt.only.begin(), opt.only.end(), p.name) != opt.only.end())
      presets.push_back(p);
  if (!opt.only.empty() && presets.size() != opt.only.size())
    throw ConfigError("preset", "unknown preset in validation filter");

  // truncation convergence
  for (const auto& p : presets) {
    const std::string name = "exact.truncation_doubling." + p.name;
    guarded(name, [&] {
      const std::size_t trunc = opt.truncation_override.value_or(p.model.photon_trunc);
      const double change = truncation_doubling_change(p, trunc, opt.quick ? 50.0 : 200.0);
      out.push_back(bounded(name, change, 1e-8, "max channel change, cutoff " + std::to_string(trunc) + " -> " +
                                                    std::to_string(2 * trunc)));
    });
  }

  guarded("exact.integrity.fig1A", [&] {
    const auto d = exact_integrity(find_preset("fig1A"));
    out.push_back({"exact.integrity.fig1A", d.max() <= 1e-8,
                   "trace " + sci(d.trace) + ", purity " + sci(d.purity) + ", energy " + sci(d.energy) +
                       ", reduced hermiticity " + sci(d.hermiticity) + ", reduced trace " +
                       sci(d.reduced_trace) + " (limit 1e-8)"});
  });

  guarded("exact.rwa_crosscheck", [&] {
    ScenarioConfig c = find_preset("fig1C");
    c.model.omega_c = 1.0;
    c.model.g = 0.005;
    c.grid.t_max = std::numbers::pi / (2.0 * c.model.g);
    c.grid.output_stride = 10;
    const auto ts = propagate_exact(c.model, c.light, initial_density(c.initial, c.model), c.grid);
    double worst = 0.0;
    for (std::size_t k = 0; k < ts.times.size(); ++k)
      worst = std::max(worst, std::abs(ts.channel("P_g")[k] - std::pow(std::sin(c.model.g * ts.times[k]), 2)));
    out.push_back(bounded("exact.rwa_crosscheck", worst, 0.02, "max |P_g - sin^2(g t)|"));
  });

  // QCME limits
  guarded("qcme.zero_coupling", [&] {
    ScenarioConfig c = find_preset("fig1C");
    c.model.g = 0.0;
    double qcme = 0.0, other = 0.0;
    for (Method m : all_methods()) {
      const auto ts = run_method(c, m);
      double& worst = (m == Method::Qcme1 || m == Method::Qcme2) ? qcme : other;
      for (std::size_t ch = 0; ch < ts.names.size(); ++ch)
        if (ts.names[ch].rfind("P_", 0) == 0) worst = std::max(worst, max_drift(ts.values[ch]));
    }
    out.push_back(bounded("qcme.zero_coupling", qcme, 1e-12, "QCME population drift at g = 0"));
    out.push_back(bounded("propagators.zero_coupling", other, 1e-10,
                          "exact and semiclassical population drift at g = 0"));
  });

  guarded("qcme.first_order_zero_mean", [&] {
    ScenarioConfig c = find_preset("fig1A");
    CMatrix plus = CMatrix::Constant(2, 2, 0.5);
    c.initial = {InitialKind::Explicit, plus};
    const auto ts = propagate_qcme(c.model, c.light, initial_density(c.initial, c.model), c.grid, 1);
    double dev = 0.0;
    for (std::size_t k = 0; k < ts.times.size(); ++k) {
      const Complex free = 0.5 * std::exp(-kI * c.model.omega0 * ts.times[k]);
      dev = std::max({dev, std::abs(ts.channel("P_e")[k] - 0.5), std::abs(ts.channel("P_g")[k] - 0.5),
                      std::abs(ts.channel("Re_rho_eg")[k] - free.real()),
                      std::abs(ts.channel("Im_rho_eg")[k] - free.imag())});
    }
    out.push_back(bounded("qcme.first_order_zero_mean", dev, 1e-12, "deviation from free evolution"));
  });

  guarded("qcme.accumulator_vs_direct", [&] {
    double worst = 0.0;
    for (const char* name : {"fig1A", "fig2AC", "fig3C"}) {
      ScenarioConfig c = find_preset(name);
      c.grid.t_max = 25.0;
      const DensityMatrix rho0 = initial_density(c.initial, c.model);
      const LightState light = c.light;
      const double g = c.model.g, wc = c.model.omega_c;
      const reference::KernelFunctions kf{
          [=](double t) { return mean_field(light, g, wc, t); },
          [=](double t, double tp) { return covariance_kernel(light, g, wc, t, tp); },
          [=](double t, double tp) { return response_kernel(g, wc, t, tp); }};
      const auto a = propagate_qcme(c.model, c.light, rho0, c.grid, 2);
      const auto b = reference::propagate_qcme_direct(c.model, kf, rho0, c.grid, 2);
      worst = std::max(worst, max_series_difference(a, b));
    }
    out.push_back(bounded("qcme.accumulator_vs_direct", worst, 1e-12,
                          "moment-sum vs stored-history integrator"));
  });

  guarded("qcme.semiclassical_equivalence", [&] {
    const ModelSpec spec = find_preset("fig1C").model;
    const double amp = effective_field(spec.g, spec.omega_c, 0.0, 1, 0.0);
    const auto [d1, d2] = semiclassical_equivalence_step(spec, amp, 0.01);
    const double order = std::log2(d1 / d2);
    out.push_back({"qcme.semiclassical_equivalence", std::isfinite(order) && order >= 2.5,
                   "one-step deviation " + sci(d1) + " -> " + sci(d2) + " on halving, observed order " +
                       sci(order) + " (required >= 2.5, i.e. O(dt^3))"});
  });

  for (const char* name : {"fig1A", "fig1B", "fig1C", "fig1D"}) {
    const std::string check = std::string("qcme.dt_halving.") + name;
    guarded(check, [&] { out.push_back(bounded(check, dt_halving_change(find_preset(name)), 1e-5,
                                               "max population change")); });
  }

  guarded("qcme.weak_coupling.fig1A", [&] {
    out.push_back(at_least("qcme.weak_coupling.fig1A", weak_coupling_ratio(find_preset("fig1A")), 3.0,
                           "error ratio g -> g/2"));
  });

  // preset comparisons -------------------------------------------------------
  std::map<std::string, PresetRun> runs;
  for (auto p : presets) {
    guarded("run." + p.name, [&] {
      p.methods = all_methods();
      runs.emplace(p.name, run_preset_checked(p));
    });
  }

  for (const auto& [name, pr] : runs) {
    const ScenarioConfig& c = pr.result.config;
    double trace = 0.0, herm = 0.0;
    for (const auto& [m, inv] : pr.invariants) {
      trace = std::max(trace, inv.trace);
      herm = std::max(herm, inv.hermiticity);
    }
    out.push_back({"invariants.trace_hermiticity." + name, trace <= 1e-6 && herm <= 1e-8,
                   "trace error " + sci(trace) + " (limit 1e-6), hermiticity " + sci(herm) +
                       " (limit 1e-8), all methods"});
    double pop = 0.0;
    std::string offenders;
    for (const auto& r : pr.result.runs) {
      const double v = population_violation(r.series);
      pop = std::max(pop, v);
      if (v > 1e-6) offenders += " " + to_string(r.method) + "=" + sci(v);
    }
    out.push_back({"invariants.population_bounds." + name, pop <= 1e-6,
                   "largest excursion outside [0, 1] " + sci(pop) + " (limit 1e-6)" +
                       (offenders.empty() ? std::string() : ";" + offenders)});

    const auto ch = primary_channel(c);
    const auto& ex = pr.result.series(Method::Exact).channel(ch);
    const double eq = mean_abs_difference(pr.result.series(Method::Qcme2).channel(ch), ex);
    const double es = mean_abs_difference(pr.result.series(Method::SemiclassicalEeff).channel(ch), ex);
    out.push_back({"accuracy_ordering." + name, eq < es,
                   "time-averaged |" + ch + " - exact|: qcme2 " + sci(eq) + ", semiclassical_eeff " + sci(es) +
                       " over t <= " + format_number(c.grid.t_max),
                   !ordering_is_claimed(name)});

    if (c.model.kind == ModelKind::Dicke) {
      double spread = 0.0;
      for (const auto& r : pr.result.runs) spread = std::max(spread, site_spread(r.series, c.model.n_atoms));
      out.push_back(bounded("dicke.symmetry." + name, spread, 1e-10, "site-channel spread, all methods"));
    }
  }

  if (runs.count("fig1C")) {
    const auto& r = runs.at("fig1C").result;
    const double pe = peak_to_peak(r.series(Method::Exact).channel("P_g"));
    const double ps = peak_to_peak(r.series(Method::SemiclassicalEeff).channel("P_g"));
    out.push_back(at_least("semiclassical.overestimation.fig1C", ps / pe, 1.1,
                           "peak-to-peak P_g ratio semiclassical_eeff / exact"));
    const double gap = max_abs_difference(r.series(Method::SemiclassicalEcl).channel("P_g"),
                                          r.series(Method::SemiclassicalEeff).channel("P_g"));
    out.push_back(at_least("semiclassical.ecl_vs_eeff.fig1C", gap, 1e-4, "max |P_g(Ecl) - P_g(Eeff)|"));
  }

  if (runs.count("fig3B") && runs.count("fig3C")) {
    const auto err = [&](const std::string& n) {
      const auto& r = runs.at(n).result;
      return max_abs_difference(r.series(Method::Qcme2).channel("P_g"), r.series(Method::Exact).channel("P_g"));
    };
    const double b = err("fig3B"), c = err("fig3C");
    out.push_back(at_least("squeezed.breakdown", c / b, 2.0,
                           "max QCME2 error fig3C / fig3B (" + sci(c) + " / " + sci(b) + ")"));
  }

  const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
  rep.wall_seconds = took.count();
  return rep;
}

}  // namespace qcme
