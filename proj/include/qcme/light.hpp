#pragma once

// Statistics of the single cavity mode seen by the molecule through
// Phi(t) = g (a^+ e^{i wc t} + a e^{-i wc t}): mean field, symmetrized and
// antisymmetrized two-time correlations, and the linear response kernel.
// Closed forms for the supported states plus a Fock-space oracle.

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <variant>

#include "qcme/hilbert.hpp"
#include "qcme/models.hpp"

namespace qcme {

struct FockState {
  std::size_t n = 0;
  friend bool operator==(const FockState&, const FockState&) = default;
};

/// c_n |n> + c_np1 |n+1> with real, non-negative amplitudes.
struct FockSuperposition {
  std::size_t n = 0;
  double c_n = 1.0;
  double c_np1 = 0.0;
  friend bool operator==(const FockSuperposition&, const FockSuperposition&) = default;
};

/// Squeezed vacuum S(r)|0>, S(r) = exp[(r/2)(a^2 - a^+2)] (squeeze phase fixed at zero).
struct SqueezedVacuum {
  double r = 0.0;
  friend bool operator==(const SqueezedVacuum&, const SqueezedVacuum&) = default;
};

using LightState = std::variant<FockState, FockSuperposition, SqueezedVacuum>;

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

inline void validate(const LightState& state) {
  std::visit(overloaded{
                 [](const FockState&) {},
                 [](const FockSuperposition& s) {
                   if (s.c_n < 0.0 || s.c_np1 < 0.0)
                     throw ConfigError("light", "superposition amplitudes must be non-negative");
                   if (std::abs(s.c_n * s.c_n + s.c_np1 * s.c_np1 - 1.0) > 1e-12)
                     throw ConfigError("light", "superposition amplitudes must satisfy "
                                                "c_n^2 + c_np1^2 = 1");
                 },
                 [](const SqueezedVacuum& s) {
                   if (!(s.r >= 0.0)) throw ConfigError("light.r", "squeezing r >= 0 required");
                 },
             },
             state);
}

namespace detail {

inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace detail

inline std::string describe(const LightState& state) {
  return std::visit(overloaded{
                        [](const FockState& s) { return "fock(n=" + std::to_string(s.n) + ")"; },
                        [](const FockSuperposition& s) {
                          return "superposition(n=" + std::to_string(s.n) + ")";
                        },
                        [](const SqueezedVacuum& s) {
                          return "squeezed_vacuum(r=" + detail::short_number(s.r) + ")";
                        },
                    },
                    state);
}

inline double mean_photon_number(const LightState& state) {
  return std::visit(overloaded{
                        [](const FockState& s) { return static_cast<double>(s.n); },
                        [](const FockSuperposition& s) {
                          return s.c_n * s.c_n * static_cast<double>(s.n) +
                                 s.c_np1 * s.c_np1 * static_cast<double>(s.n + 1);
                        },
                        [](const SqueezedVacuum& s) { return std::pow(std::sinh(s.r), 2); },
                    },
                    state);
}

/// Highest Fock level with non-zero amplitude, or nullopt for unbounded support.
inline std::optional<std::size_t> max_occupied_level(const LightState& state) {
  return std::visit(overloaded{
                        [](const FockState& s) -> std::optional<std::size_t> { return s.n; },
                        [](const FockSuperposition& s) -> std::optional<std::size_t> {
                          return s.c_np1 > 0.0 ? s.n + 1 : s.n;
                        },
                        [](const SqueezedVacuum& s) -> std::optional<std::size_t> {
                          if (s.r == 0.0) return 0;
                          return std::nullopt;
                        },
                    },
                    state);
}

// ---------------------------------------------------------------------------
// Closed forms. Units: hbar = 1, so Phi carries units of g.

inline double mean_field(const LightState& state, double g, double omega_c, double t) {
  if (const auto* s = std::get_if<FockSuperposition>(&state))
    return 2.0 * g * std::sqrt(static_cast<double>(s->n + 1)) * s->c_n * s->c_np1 *
           std::cos(omega_c * t);
  return 0.0;
}

inline double sym_corr(const LightState& state, double g, double omega_c, double t, double tp) {
  const double g2 = g * g;
  return std::visit(
      overloaded{
          [&](const FockState& s) {
            return g2 * (2.0 * static_cast<double>(s.n) + 1.0) * std::cos(omega_c * (t - tp));
          },
          [&](const FockSuperposition& s) {
            const double n = static_cast<double>(s.n);
            return g2 * (s.c_n * s.c_n * (2.0 * n + 1.0) + s.c_np1 * s.c_np1 * (2.0 * n + 3.0)) *
                   std::cos(omega_c * (t - tp));
          },
          [&](const SqueezedVacuum& s) {
            const double sh = std::sinh(s.r);
            const double ch = std::cosh(s.r);
            return g2 * ((2.0 * sh * sh + 1.0) * std::cos(omega_c * (t - tp)) -
                         2.0 * ch * sh * std::cos(omega_c * (t + tp)));
          },
      },
      state);
}

/// <[Phi(t), Phi(t')]>/(2i); the same for every state of a free mode.
inline double antisym_corr(double g, double omega_c, double t, double tp) {
  return -g * g * std::sin(omega_c * (t - tp));
}

/// Linear response kernel with the Poisson bracket replaced by its commutator limit,
/// chi = <[Phi(t), Phi(t')]>/(i hbar) = 2 A(t,t').
inline double response_kernel(double g, double omega_c, double t, double tp) {
  return 2.0 * antisym_corr(g, omega_c, t, tp);
}

inline double covariance_kernel(const LightState& state, double g, double omega_c, double t,
                                double tp) {
  return sym_corr(state, g, omega_c, t, tp) -
         mean_field(state, g, omega_c, t) * mean_field(state, g, omega_c, tp);
}

// ---------------------------------------------------------------------------
// Separable representation. Every kernel of a single free mode is a bilinear form in
// b(t) = (cos wc t, sin wc t):  K(t,t') = b(t)^T M b(t'),  and the mean field is
// mean_amplitude * cos(wc t). The master-equation integrator consumes this form.

/// Kernel data for the second-order master equation. Coefficient matrices act on
/// b(t) = (cos wc t, sin wc t).
struct FieldKernels {
  double omega_c = 1.0;
  double mean_amplitude = 0.0;
  Eigen::Matrix2d sym = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d antisym = Eigen::Matrix2d::Zero();

  Eigen::Vector2d basis(double t) const { return {std::cos(omega_c * t), std::sin(omega_c * t)}; }

  double mean(double t) const { return mean_amplitude * std::cos(omega_c * t); }
  double sym_corr(double t, double tp) const { return basis(t).dot(sym * basis(tp)); }
  double antisym_corr(double t, double tp) const { return basis(t).dot(antisym * basis(tp)); }
  double chi(double t, double tp) const { return 2.0 * antisym_corr(t, tp); }
  double cov(double t, double tp) const { return sym_corr(t, tp) - mean(t) * mean(tp); }

  Eigen::Matrix2d cov_coefficients() const {
    Eigen::Matrix2d c = sym;
    c(0, 0) -= mean_amplitude * mean_amplitude;
    return c;
  }
  Eigen::Matrix2d chi_coefficients() const { return 2.0 * antisym; }

  bool is_zero() const {
    return mean_amplitude == 0.0 && sym.isZero(0.0) && antisym.isZero(0.0);
  }

  /// Covariance E(t)E(t') of the drive E(t) = amplitude cos(wc t); mean and chi zero.
  static FieldKernels deterministic_covariance(double amplitude, double omega_c) {
    FieldKernels k;
    k.omega_c = omega_c;
    k.sym(0, 0) = amplitude * amplitude;
    return k;
  }
};

inline FieldKernels field_kernels(const LightState& state, double g, double omega_c) {
  validate(state);
  FieldKernels k;
  k.omega_c = omega_c;
  const double g2 = g * g;
  // cos(w(t-t')) -> identity, cos(w(t+t')) -> diag(1,-1), sin(w(t-t')) -> [[0,-1],[1,0]]
  const Eigen::Matrix2d cos_diff = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d cos_sum;
  cos_sum << 1.0, 0.0, 0.0, -1.0;
  Eigen::Matrix2d sin_diff;
  sin_diff << 0.0, -1.0, 1.0, 0.0;

  std::visit(overloaded{
                 [&](const FockState& s) {
                   k.sym = g2 * (2.0 * static_cast<double>(s.n) + 1.0) * cos_diff;
                 },
                 [&](const FockSuperposition& s) {
                   const double n = static_cast<double>(s.n);
                   k.sym = g2 *
                           (s.c_n * s.c_n * (2.0 * n + 1.0) + s.c_np1 * s.c_np1 * (2.0 * n + 3.0)) *
                           cos_diff;
                   k.mean_amplitude = 2.0 * g * std::sqrt(n + 1.0) * s.c_n * s.c_np1;
                 },
                 [&](const SqueezedVacuum& s) {
                   const double sh = std::sinh(s.r);
                   const double ch = std::cosh(s.r);
                   k.sym = g2 * ((2.0 * sh * sh + 1.0) * cos_diff - 2.0 * ch * sh * cos_sum);
                 },
             },
             state);
  k.antisym = -g2 * sin_diff;
  return k;
}

// ---------------------------------------------------------------------------
// Fock-space construction and the brute-force correlation oracle.

inline constexpr double kTruncationNormTolerance = 1e-10;

/// Normalized Fock amplitudes on levels 0..trunc. Throws TruncationError when the
/// weight outside the cutoff exceeds kTruncationNormTolerance.
inline CVector state_vector(const LightState& state, std::size_t trunc) {
  validate(state);
  const auto d = static_cast<Eigen::Index>(trunc + 1);
  CVector psi = CVector::Zero(d);
  const auto too_small = [&](std::size_t need) {
    return TruncationError("photon truncation " + std::to_string(trunc) + " cannot hold " +
                           describe(state) + " (needs >= " + std::to_string(need) + ")");
  };
  std::visit(overloaded{
                 [&](const FockState& s) {
                   if (s.n > trunc) throw too_small(s.n);
                   psi(static_cast<Eigen::Index>(s.n)) = 1.0;
                 },
                 [&](const FockSuperposition& s) {
                   if (s.n + 1 > trunc) throw too_small(s.n + 1);
                   psi(static_cast<Eigen::Index>(s.n)) = s.c_n;
                   psi(static_cast<Eigen::Index>(s.n + 1)) = s.c_np1;
                 },
                 [&](const SqueezedVacuum& s) {
                   // Squeeze in a larger working space, then check what falls outside.
                   const std::size_t work = 2 * trunc + 40;
                   const CMatrix a = ops::annihilation(work);
                   const CMatrix a2 = a * a;
                   const CMatrix gen = kI * (0.5 * s.r) * (a2 - a2.adjoint());  // hermitian
                   CVector vac = CVector::Zero(static_cast<Eigen::Index>(work + 1));
                   vac(0) = 1.0;
                   const CVector full = UnitaryPropagator(Operator(gen)).evolve(vac, 1.0);
                   psi = full.head(d);
                   const double tail = 1.0 - psi.squaredNorm();
                   if (tail > kTruncationNormTolerance)
                     throw TruncationError("photon truncation " + std::to_string(trunc) +
                                           " leaves norm deficit " + detail::short_number(tail) +
                                           " for " + describe(state));
                   psi /= psi.norm();
                 },
             },
             state);
  return psi;
}

/// Smallest cutoff >= start at which state_vector succeeds.
inline std::size_t minimal_truncation(const LightState& state, std::size_t start = 0) {
  std::size_t trunc = start;
  if (auto top = max_occupied_level(state)) trunc = std::max(trunc, *top);
  for (;; trunc += 5) {
    try {
      (void)state_vector(state, trunc);
      return trunc;
    } catch (const TruncationError&) {
      if (trunc > 2000) throw;
    }
  }
}

struct CorrelationSample {
  double sym = 0.0;
  double antisym = 0.0;
  double mean_t = 0.0;
};

/// Evaluates <Phi(t)Phi(t')> in the truncated Fock basis.
class CorrelationOracle {
 public:
  CorrelationOracle(const LightState& state, double g, double omega_c, std::size_t trunc)
      : g_(g), omega_c_(omega_c), psi_(state_vector(state, trunc)) {
    if (auto top = max_occupied_level(state); top && trunc < *top + 10)
      throw TruncationError("correlation oracle needs truncation >= " + std::to_string(*top + 10) +
                            " for " + describe(state));
    const CMatrix a = ops::annihilation(trunc);
    a_psi_ = a * psi_;
    adag_psi_ = a.adjoint() * psi_;
  }

  CorrelationSample operator()(double t, double tp) const {
    const CVector vt = field_on_state(t);
    const CVector vtp = field_on_state(tp);
    const Complex z = vt.dot(vtp);  // <psi|Phi(t) Phi(t')|psi>
    return {z.real(), z.imag(), psi_.dot(vt).real()};
  }

  const CVector& state() const noexcept { return psi_; }

 private:
  CVector field_on_state(double t) const {
    const Complex ph = std::exp(kI * (omega_c_ * t));
    return g_ * (ph * adag_psi_ + std::conj(ph) * a_psi_);
  }

  double g_;
  double omega_c_;
  CVector psi_;
  CVector a_psi_;
  CVector adag_psi_;
};

inline CorrelationSample corr_oracle(const LightState& state, double g, double omega_c,
                                     std::size_t trunc, double t, double tp) {
  return CorrelationOracle(state, g, omega_c, trunc)(t, tp);
}

struct PhotonMoments {
  double mean_n = 0.0;
  double mandel_q = 0.0;       // (Var n - <n>)/<n>; negative for sub-Poissonian light
  double squeezing = 0.0;      // Var X - 1/2 with X = (a + a^+)/sqrt(2)
};

inline PhotonMoments photon_moments(const CVector& psi) {
  const auto trunc = static_cast<std::size_t>(psi.size() - 1);
  const CMatrix a = ops::annihilation(trunc);
  const CMatrix n = ops::number(trunc);
  const CMatrix x = (a + a.adjoint()) / std::sqrt(2.0);
  PhotonMoments m;
  m.mean_n = psi.dot(n * psi).real();
  const double n2 = psi.dot(n * (n * psi)).real();
  m.mandel_q = m.mean_n > 0.0 ? (n2 - m.mean_n * m.mean_n - m.mean_n) / m.mean_n : 0.0;
  const double xm = psi.dot(x * psi).real();
  const double x2 = psi.dot(x * (x * psi)).real();
  m.squeezing = x2 - xm * xm - 0.5;
  return m;
}

}  // namespace qcme
