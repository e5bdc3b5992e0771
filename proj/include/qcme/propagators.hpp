#pragma once

// The three molecular-dynamics engines: exact propagation of molecule plus mode,
// the time-nonlocal second-order quantum-classical master equation, and
// semiclassical driving by a classical field.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qcme/hilbert.hpp"
#include "qcme/light.hpp"
#include "qcme/models.hpp"

namespace qcme {

// ---------------------------------------------------------------------------
// Time grid

struct PropagationGrid {
  double t_max = 0.0;
  double dt = 0.0;
  std::size_t output_stride = 1;  // record every output_stride-th step

  std::size_t n_steps() const {
    return dt > 0.0 ? static_cast<std::size_t>(std::llround(t_max / dt)) : 0;
  }
  std::size_t n_samples() const { return n_steps() / output_stride + 1; }
  /// Last integrated step; always a recorded one.
  std::size_t last_step() const { return (n_steps() / output_stride) * output_stride; }
  double time(std::size_t step) const { return static_cast<double>(step) * dt; }

  friend bool operator==(const PropagationGrid&, const PropagationGrid&) = default;
};

inline double default_dt(const ModelSpec& spec) {
  return 2.0 * std::numbers::pi / (400.0 * std::max(spec.omega0, spec.omega_c));
}

inline double max_dt(const ModelSpec& spec) {
  return std::min(2.0 * std::numbers::pi / spec.omega0, 2.0 * std::numbers::pi / spec.omega_c) /
         200.0;
}

inline void validate(const PropagationGrid& grid, const ModelSpec& spec) {
  if (!(grid.dt > 0.0)) throw GridError("grid dt must be positive");
  if (grid.dt > max_dt(spec) * (1.0 + 1e-12))
    throw GridError("grid dt " + std::to_string(grid.dt) + " exceeds the resolution limit " +
                    std::to_string(max_dt(spec)) + " = min(2pi/omega0, 2pi/omega_c)/200");
  if (!(grid.t_max > 0.0) || grid.n_steps() == 0) throw GridError("grid has no time steps");
  if (grid.output_stride == 0) throw GridError("output_stride must be >= 1");
}

// ---------------------------------------------------------------------------
// Time series of observables

struct TimeSeries {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // values[c][k] is channel c at times[k]
  std::vector<std::string> warnings;

  bool has(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
  }

  const std::vector<double>& channel(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error("time series has no channel '" + name + "'");
    return values[static_cast<std::size_t>(it - names.begin())];
  }

  void append(double t, const std::vector<std::pair<std::string, double>>& sample) {
    if (names.empty()) {
      for (const auto& [n, v] : sample) names.push_back(n);
      values.resize(names.size());
    }
    times.push_back(t);
    for (std::size_t c = 0; c < sample.size(); ++c) values[c].push_back(sample[c].second);
  }
};

/// Optional per-sample hook receiving the Schroedinger-picture molecular state.
using StateObserver = std::function<void(double t, const CMatrix& rho_m)>;

// ---------------------------------------------------------------------------
// Observables

/// Index bit of `site` in the molecular basis (site 0 is the leading factor); bit set = |g>.
inline bool site_is_ground(std::size_t basis_index, std::size_t site, std::size_t n_atoms) {
  return (basis_index >> (n_atoms - 1 - site)) & 1u;
}

inline std::vector<double> site_ground_populations(const CMatrix& rho_m, std::size_t n_atoms) {
  std::vector<double> pg(n_atoms, 0.0);
  for (Eigen::Index b = 0; b < rho_m.rows(); ++b)
    for (std::size_t i = 0; i < n_atoms; ++i)
      if (site_is_ground(static_cast<std::size_t>(b), i, n_atoms)) pg[i] += rho_m(b, b).real();
  return pg;
}

/// Population and coherence channels. Rabi: P_e, P_g, Re_rho_eg, Im_rho_eg (rho_eg = <e|rho|g>).
/// Dicke: P_e_i, P_g_i for every site i = 1..N (site-reduced populations).
inline std::vector<std::pair<std::string, double>> observables(const CMatrix& rho_m,
                                                               const ModelSpec& spec) {
  if (static_cast<std::size_t>(rho_m.rows()) != spec.molecular_dim())
    throw DimensionError("observables expect a molecular density matrix");
  std::vector<std::pair<std::string, double>> out;
  if (spec.kind == ModelKind::Rabi) {
    out.emplace_back("P_e", rho_m(0, 0).real());
    out.emplace_back("P_g", rho_m(1, 1).real());
    out.emplace_back("Re_rho_eg", rho_m(0, 1).real());
    out.emplace_back("Im_rho_eg", rho_m(0, 1).imag());
    return out;
  }
  const double tr = rho_m.trace().real();
  const auto pg = site_ground_populations(rho_m, spec.n_atoms);
  for (std::size_t i = 0; i < spec.n_atoms; ++i) {
    const std::string site = std::to_string(i + 1);
    out.emplace_back("P_e_" + site, tr - pg[i]);
    out.emplace_back("P_g_" + site, pg[i]);
  }
  return out;
}

inline std::vector<std::pair<std::string, double>> observables(const DensityMatrix& rho_m,
                                                               const ModelSpec& spec) {
  return observables(rho_m.matrix(), spec);
}

/// Largest departure of a population channel from [0, 1] and of each site's
/// P_e + P_g from 1.
inline double population_violation(const TimeSeries& ts) {
  double worst = 0.0;
  for (std::size_t c = 0; c < ts.names.size(); ++c) {
    if (ts.names[c].rfind("P_", 0) != 0) continue;
    for (double p : ts.values[c]) worst = std::max({worst, -p, p - 1.0});
  }
  for (std::size_t c = 0; c < ts.names.size(); ++c) {
    const std::string& n = ts.names[c];
    if (n.rfind("P_e", 0) != 0) continue;
    const std::string partner = "P_g" + n.substr(3);
    if (!ts.has(partner)) continue;
    const auto& pe = ts.values[c];
    const auto& pg = ts.channel(partner);
    for (std::size_t k = 0; k < pe.size(); ++k) worst = std::max(worst, std::abs(pe[k] + pg[k] - 1.0));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Exact propagation of molecule (x) mode

/// rho(0) = rho_m0 (x) |psi_c><psi_c| evolved under the full Hamiltonian. A mixed rho_m0
/// is carried as a weighted ensemble of pure components.
class ExactPropagator {
 public:
  ExactPropagator(const ModelSpec& spec, const LightState& light, const DensityMatrix& rho_m0)
      : spec_(spec), hamiltonian_(full_hamiltonian(spec)), prop_(hamiltonian_) {
    if (rho_m0.dims() != spec.molecular_dims())
      throw DimensionError("initial molecular state does not match the model");
    const CVector photon = state_vector(light, spec.photon_trunc);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_m0.matrix());
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      const double w = es.eigenvalues()(k);
      if (w <= 1e-14) continue;
      weights_.push_back(w);
      coeffs_.push_back(prop_.coefficients(kron(es.eigenvectors().col(k), photon)));
    }
  }

  const ModelSpec& spec() const noexcept { return spec_; }
  const Operator& hamiltonian() const noexcept { return hamiltonian_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// Pure components of the full state at time t (weights from `weights()`).
  std::vector<CVector> components(double t) const {
    std::vector<CVector> out;
    out.reserve(coeffs_.size());
    for (const auto& c : coeffs_) out.push_back(prop_.evolve_coefficients(c, t));
    return out;
  }

  CMatrix reduced_state(const std::vector<CVector>& comps) const {
    const auto dm = static_cast<Eigen::Index>(spec_.molecular_dim());
    CMatrix rho = CMatrix::Zero(dm, dm);
    for (std::size_t k = 0; k < comps.size(); ++k)
      rho += weights_[k] * partial_trace_pure(comps[k], spec_.full_dims(), spec_.molecular_dims());
    return rho;
  }

  CMatrix reduced_state(double t) const { return reduced_state(components(t)); }

  struct Diagnostics {
    double trace = 0.0;
    double purity = 0.0;
    double energy = 0.0;
    double reduced_hermiticity_error = 0.0;
    double reduced_trace = 0.0;
  };

  /// Conservation diagnostics evaluated directly in the product basis.
  Diagnostics diagnostics(double t) const {
    const auto comps = components(t);
    Diagnostics d;
    for (std::size_t k = 0; k < comps.size(); ++k) {
      d.trace += weights_[k] * comps[k].squaredNorm();
      d.energy += weights_[k] * comps[k].dot(hamiltonian_.matrix() * comps[k]).real();
      for (std::size_t l = 0; l < comps.size(); ++l)
        d.purity += weights_[k] * weights_[l] * std::norm(comps[k].dot(comps[l]));
    }
    const CMatrix rho = reduced_state(comps);
    d.reduced_hermiticity_error = max_abs(rho - rho.adjoint());
    d.reduced_trace = rho.trace().real();
    return d;
  }

 private:
  ModelSpec spec_;
  Operator hamiltonian_;
  UnitaryPropagator prop_;
  std::vector<double> weights_;
  std::vector<CVector> coeffs_;
};

inline TimeSeries propagate_exact(const ModelSpec& spec, const LightState& light,
                                  const DensityMatrix& rho_m0, const PropagationGrid& grid,
                                  const StateObserver& observer = {}) {
  validate(spec);
  validate(grid, spec);
  const ExactPropagator prop(spec, light, rho_m0);
  TimeSeries ts;
  for (std::size_t step = 0; step <= grid.last_step(); step += grid.output_stride) {
    const double t = grid.time(step);
    const CMatrix rho = prop.reduced_state(t);
    if (observer) observer(t, rho);
    ts.append(t, observables(rho, spec));
  }
  return ts;
}

// ---------------------------------------------------------------------------
// Quantum-classical master equation

namespace detail {

/// Interaction picture of H_S, carried in the eigenbasis of H_S.
class InteractionFrame {
 public:
  explicit InteractionFrame(const ModelSpec& spec)
      : spec_(eigendecompose(molecular_hamiltonian(spec))),
        k_eig_(spec_.vectors.adjoint() * coupling_operator(spec).matrix() * spec_.vectors) {}

  CVector phases(double t) const {
    return (kI * t * spec_.values.cast<Complex>()).array().exp();  // e^{i E_j t}
  }

  /// K(t) = e^{i H_S t} K e^{-i H_S t}
  CMatrix coupling(double t) const {
    const CVector p = phases(t);
    return p.asDiagonal() * k_eig_ * p.conjugate().asDiagonal();
  }

  CMatrix to_frame(const CMatrix& rho_s) const {
    return spec_.vectors.adjoint() * rho_s * spec_.vectors;
  }

  /// Schroedinger-picture state in the product basis at time t.
  CMatrix to_schroedinger(const CMatrix& rho_i, double t) const {
    const CVector p = phases(t);
    const CMatrix rot = p.conjugate().asDiagonal() * rho_i * p.asDiagonal();
    return spec_.vectors * rot * spec_.vectors.adjoint();
  }

 private:
  Spectrum spec_;
  CMatrix k_eig_;
};

inline void check_trace(const CMatrix& rho, double t, double tolerance) {
  const Complex tr = rho.trace();
  if (!(std::abs(tr - 1.0) <= tolerance))
    throw TraceDriftError("master-equation trace drifted to " + std::to_string(tr.real()) + "+" +
                          std::to_string(tr.imag()) + "i at t = " + std::to_string(t));
}

inline void check_order(int order) {
  if (order != 1 && order != 2) throw Error("master-equation order must be 1 or 2");
}

}  // namespace detail

inline constexpr double kTraceAbortTolerance = 1e-4;

/// Integrates, in the interaction picture of H_S,
///   d rho/dt = -i <Phi(t)> [K(t), rho(t)]
///              - int_0^t dt' cov(t,t') [K(t), [K(t'), rho(t')]]
///              - (i/2) int_0^t dt' chi(t,t') [K(t), {K(t'), rho(t')}]
/// (order 1 keeps only the first line). The history integrals use trapezoidal weights on
/// the grid; since the kernels are bilinear in (cos wc t', sin wc t') the quadrature is
/// carried by four running moment sums instead of the stored history. Stepping is Heun:
/// Euler predictor, then one trapezoidal corrector with the closed history integral.
inline TimeSeries propagate_qcme(const ModelSpec& spec, const FieldKernels& kernels,
                                 const DensityMatrix& rho_m0, const PropagationGrid& grid,
                                 int order, const StateObserver& observer = {}) {
  validate(spec);
  validate(grid, spec);
  detail::check_order(order);
  if (rho_m0.dims() != spec.molecular_dims())
    throw DimensionError("initial molecular state does not match the model");

  const detail::InteractionFrame frame(spec);
  const Eigen::Matrix2d cov = kernels.cov_coefficients();
  const Eigen::Matrix2d chi = kernels.chi_coefficients();
  const bool memory = order == 2;
  const double dt = grid.dt;
  const auto d = static_cast<Eigen::Index>(spec.molecular_dim());

  // moments[q]     = int b_q(t') [K(t'), rho(t')] dt'
  // moments[2 + q] = int b_q(t') {K(t'), rho(t')} dt'
  using Moments = std::array<CMatrix, 4>;
  struct Integrand {
    CMatrix k;
    Moments terms;
  };

  const auto integrand = [&](double t, const CMatrix& rho) {
    Integrand out{frame.coupling(t), {}};
    if (memory) {
      const Eigen::Vector2d b = kernels.basis(t);
      const CMatrix c = commutator(out.k, rho);
      const CMatrix a = anticommutator(out.k, rho);
      out.terms = {b(0) * c, b(1) * c, b(0) * a, b(1) * a};
    }
    return out;
  };

  const auto closed_moments = [&](const Moments& m, const Integrand& lo, const Integrand& hi) {
    if (!memory) return m;
    Moments out;
    for (std::size_t q = 0; q < 4; ++q) out[q] = m[q] + (0.5 * dt) * (lo.terms[q] + hi.terms[q]);
    return out;
  };

  const auto rhs = [&](double t, const CMatrix& rho, const CMatrix& k, const Moments& m) {
    CMatrix f = (-kI * kernels.mean(t)) * commutator(k, rho);
    if (memory) {
      const Eigen::Vector2d b = kernels.basis(t);
      const Eigen::Vector2d wc = cov.transpose() * b;  // sum_p b_p cov_pq
      const Eigen::Vector2d wx = chi.transpose() * b;
      const CMatrix inner_cov = wc(0) * m[0] + wc(1) * m[1];
      const CMatrix inner_chi = wx(0) * m[2] + wx(1) * m[3];
      f -= commutator(k, inner_cov);
      f -= (0.5 * kI) * commutator(k, inner_chi);
    }
    return f;
  };

  CMatrix rho = frame.to_frame(rho_m0.matrix());
  Moments moments;
  moments.fill(CMatrix::Zero(d, d));
  Integrand cur = integrand(0.0, rho);
  CMatrix f_cur = rhs(0.0, rho, cur.k, moments);

  TimeSeries ts;
  const std::size_t last = grid.last_step();
  for (std::size_t step = 0;; ++step) {
    const double t = grid.time(step);
    if (step % grid.output_stride == 0) {
      const CMatrix rho_s = frame.to_schroedinger(rho, t);
      if (observer) observer(t, rho_s);
      ts.append(t, observables(rho_s, spec));
    }
    if (step == last) break;

    const double tn = grid.time(step + 1);
    const CMatrix predicted = rho + dt * f_cur;
    const Integrand pred = integrand(tn, predicted);
    const CMatrix f_pred = rhs(tn, predicted, pred.k, closed_moments(moments, cur, pred));
    rho += (0.5 * dt) * (f_cur + f_pred);
    detail::check_trace(rho, tn, kTraceAbortTolerance);

    const Integrand next = integrand(tn, rho);
    moments = closed_moments(moments, cur, next);
    cur = next;
    f_cur = rhs(tn, rho, cur.k, moments);
  }
  return ts;
}

inline TimeSeries propagate_qcme(const ModelSpec& spec, const LightState& light,
                                 const DensityMatrix& rho_m0, const PropagationGrid& grid,
                                 int order, const StateObserver& observer = {}) {
  return propagate_qcme(spec, field_kernels(light, spec.g, spec.omega_c), rho_m0, grid, order,
                        observer);
}

namespace reference {

struct KernelFunctions {
  std::function<double(double)> mean;
  std::function<double(double, double)> cov;
  std::function<double(double, double)> chi;
};

/// Same scheme as propagate_qcme but with the full density-matrix history stored and the
/// trapezoidal sums evaluated explicitly against arbitrary kernel functions. O(n^2).
inline TimeSeries propagate_qcme_direct(const ModelSpec& spec, const KernelFunctions& kf,
                                        const DensityMatrix& rho_m0, const PropagationGrid& grid,
                                        int order) {
  validate(spec);
  validate(grid, spec);
  detail::check_order(order);
  const detail::InteractionFrame frame(spec);
  const double dt = grid.dt;
  std::vector<CMatrix> comm_hist;
  std::vector<CMatrix> anti_hist;
  std::vector<double> times;

  // Trapezoidal integral over the stored history plus the trial endpoint (k_n, rho_n).
  const auto rhs = [&](double t, const CMatrix& rho, const CMatrix& k) {
    CMatrix f = (-kI * kf.mean(t)) * commutator(k, rho);
    if (order == 2) {
      const CMatrix c_end = commutator(k, rho);
      const CMatrix a_end = anticommutator(k, rho);
      CMatrix ic = CMatrix::Zero(rho.rows(), rho.cols());
      CMatrix ia = ic;
      const std::size_t n = times.size();
      for (std::size_t j = 0; j < n; ++j) {
        const double w = (j == 0) ? 0.5 * dt : dt;
        ic += (w * kf.cov(t, times[j])) * comm_hist[j];
        ia += (w * kf.chi(t, times[j])) * anti_hist[j];
      }
      if (n > 0) {
        ic += (0.5 * dt * kf.cov(t, t)) * c_end;
        ia += (0.5 * dt * kf.chi(t, t)) * a_end;
      }
      f -= commutator(k, ic);
      f -= (0.5 * kI) * commutator(k, ia);
    }
    return f;
  };

  CMatrix rho = frame.to_frame(rho_m0.matrix());
  TimeSeries ts;
  const std::size_t last = grid.last_step();
  CMatrix k = frame.coupling(0.0);
  CMatrix f_cur = rhs(0.0, rho, k);
  for (std::size_t step = 0;; ++step) {
    const double t = grid.time(step);
    if (step % grid.output_stride == 0) ts.append(t, observables(frame.to_schroedinger(rho, t), spec));
    if (step == last) break;
    comm_hist.push_back(commutator(k, rho));
    anti_hist.push_back(anticommutator(k, rho));
    times.push_back(t);

    const double tn = grid.time(step + 1);
    const CMatrix kn = frame.coupling(tn);
    const CMatrix predicted = rho + dt * f_cur;
    const CMatrix f_pred = rhs(tn, predicted, kn);
    rho += (0.5 * dt) * (f_cur + f_pred);
    k = kn;
    f_cur = rhs(tn, rho, k);
  }
  return ts;
}

}  // namespace reference

// ---------------------------------------------------------------------------
// Semiclassical driving

/// Classical field whose two-time correlation reproduces the symmetrized one.
inline double classical_field(double g, double omega_c, double mean_n, double t) {
  return 2.0 * g * std::sqrt(mean_n + 0.5) * std::cos(omega_c * t);
}

/// Field with the emission (n_a = 1) or absorption (n_a = 0) counting of the atom included.
inline double effective_field(double g, double omega_c, double mean_n, int n_a, double t) {
  return 2.0 * g * std::sqrt(mean_n + static_cast<double>(n_a)) * std::cos(omega_c * t);
}

struct FieldChoice {
  enum class Kind { Ecl, Eeff };
  Kind kind = Kind::Eeff;
  std::optional<int> n_a;  // Eeff only; inferred from the initial state when unset

  friend bool operator==(const FieldChoice&, const FieldChoice&) = default;
};

/// n_a = 1 for an all-excited preparation, 0 for all-ground; anything else must be set
/// explicitly.
inline int infer_emission_count(const CMatrix& rho_m0, std::size_t n_atoms) {
  const auto pg = site_ground_populations(rho_m0, n_atoms);
  const bool all_ground = std::all_of(pg.begin(), pg.end(), [](double p) { return p >= 1.0 - 1e-9; });
  const bool all_excited = std::all_of(pg.begin(), pg.end(), [](double p) { return p <= 1e-9; });
  if (all_excited) return 1;
  if (all_ground) return 0;
  throw InvalidStateError(
      "effective field needs n_a for a mixed or partially excited initial state; set it explicitly");
}

namespace detail {

/// exp(-i h dt) for h = (w0/2) sigma_z + e sigma_x.
inline Eigen::Matrix2cd site_step(double omega0, double e, double dt) {
  const double hz = 0.5 * omega0;
  const double norm = std::hypot(hz, e);
  Eigen::Matrix2cd h;
  h << hz, e, e, -hz;
  if (norm == 0.0) return Eigen::Matrix2cd::Identity();
  return std::cos(norm * dt) * Eigen::Matrix2cd::Identity() -
         kI * (std::sin(norm * dt) / norm) * h;
}

}  // namespace detail

/// Unitary evolution under H_S + K E(t), piecewise constant with E at each step midpoint.
/// Both models split into identical single-atom terms, so the step propagator is the
/// N-fold Kronecker power of the single-atom one.
inline TimeSeries propagate_driven(const ModelSpec& spec, const std::function<double(double)>& field,
                                   const DensityMatrix& rho_m0, const PropagationGrid& grid,
                                   const StateObserver& observer = {}) {
  validate(spec);
  validate(grid, spec);
  if (rho_m0.dims() != spec.molecular_dims())
    throw DimensionError("initial molecular state does not match the model");
  CMatrix rho = rho_m0.matrix();
  TimeSeries ts;
  const std::size_t last = grid.last_step();
  for (std::size_t step = 0;; ++step) {
    const double t = grid.time(step);
    if (step % grid.output_stride == 0) {
      if (observer) observer(t, rho);
      ts.append(t, observables(rho, spec));
    }
    if (step == last) break;
    const Eigen::Matrix2cd u1 = detail::site_step(spec.omega0, field(t + 0.5 * grid.dt), grid.dt);
    CMatrix u = u1;
    for (std::size_t i = 1; i < spec.n_atoms; ++i) u = tensor(Operator(u), Operator(CMatrix(u1))).matrix();
    rho = u * rho * u.adjoint();
  }
  return ts;
}

inline TimeSeries propagate_semiclassical(const ModelSpec& spec, const FieldChoice& choice,
                                          const LightState& light, const DensityMatrix& rho_m0,
                                          const PropagationGrid& grid,
                                          const StateObserver& observer = {}) {
  const double g = spec.g;
  const double wc = spec.omega_c;
  const double mean_n = mean_photon_number(light);
  std::vector<std::string> warnings;
  std::function<double(double)> field;
  if (choice.kind == FieldChoice::Kind::Ecl) {
    field = [=](double t) { return classical_field(g, wc, mean_n, t); };
  } else {
    const int n_a = choice.n_a ? *choice.n_a : infer_emission_count(rho_m0.matrix(), spec.n_atoms);
    if (n_a != 0 && n_a != 1) throw ConfigError("n_a", "n_a must be 0 or 1");
    if (mean_n == 0.0 && n_a == 0)
      warnings.push_back("effective field vanishes (no photons, n_a = 0): no dynamics");
    field = [=](double t) { return effective_field(g, wc, mean_n, n_a, t); };
  }
  TimeSeries ts = propagate_driven(spec, field, rho_m0, grid, observer);
  ts.warnings = std::move(warnings);
  return ts;
}

}  // namespace qcme
