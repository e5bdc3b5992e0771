#pragma once

// Rabi and Dicke model Hamiltonians. Basis convention: atoms first (|e> before |g>
// within each atom), photon Fock factor last. hbar = omega0 = 1 unless stated.

#include <cmath>
#include <string>

#include "qcme/hilbert.hpp"

namespace qcme {

enum class ModelKind { Rabi, Dicke };

inline std::string to_string(ModelKind k) { return k == ModelKind::Rabi ? "rabi" : "dicke"; }

struct ModelSpec {
  ModelKind kind = ModelKind::Rabi;
  std::size_t n_atoms = 1;
  double omega0 = 1.0;
  double omega_c = 1.0;
  double g = 0.0;
  std::size_t photon_trunc = 20;  // photon space has photon_trunc + 1 levels

  std::size_t molecular_dim() const { return std::size_t{1} << n_atoms; }
  std::size_t photon_dim() const { return photon_trunc + 1; }
  Dims molecular_dims() const { return Dims(n_atoms, 2); }
  Dims full_dims() const {
    Dims d = molecular_dims();
    d.push_back(photon_dim());
    return d;
  }
  double detuning() const { return omega0 - omega_c; }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

inline void validate(const ModelSpec& s) {
  if (!(s.g >= 0.0)) throw ConfigError("model.g", "g >= 0 required");
  if (!(s.omega_c > 0.0)) throw ConfigError("model.omega_c", "omega_c > 0 required");
  if (!(s.omega0 > 0.0)) throw ConfigError("model.omega0", "omega0 > 0 required");
  if (s.n_atoms == 0) throw ConfigError("model.n_atoms", "n_atoms >= 1 required");
  if (s.kind == ModelKind::Rabi && s.n_atoms != 1)
    throw ConfigError("model.n_atoms", "the Rabi model has exactly one atom");
  if (s.n_atoms > 10) throw ConfigError("model.n_atoms", "n_atoms <= 10 supported (dense storage)");
}

namespace ops {

inline CMatrix sigma_x() {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  return m;
}
inline CMatrix sigma_y() {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 1) = -kI;
  m(1, 0) = kI;
  return m;
}
inline CMatrix sigma_z() {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}
inline CMatrix excited_projector() {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  return m;
}
inline CMatrix ground_projector() {
  CMatrix m = CMatrix::Zero(2, 2);
  m(1, 1) = 1.0;
  return m;
}

/// Annihilation operator on Fock levels 0..trunc.
inline CMatrix annihilation(std::size_t trunc) {
  const auto d = static_cast<Eigen::Index>(trunc + 1);
  CMatrix a = CMatrix::Zero(d, d);
  for (Eigen::Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline CMatrix number(std::size_t trunc) {
  const auto d = static_cast<Eigen::Index>(trunc + 1);
  CMatrix m = CMatrix::Zero(d, d);
  for (Eigen::Index n = 0; n < d; ++n) m(n, n) = static_cast<double>(n);
  return m;
}

/// Single-atom operator embedded at `site` of an n_atoms register.
inline Operator site_operator(const CMatrix& op, std::size_t site, std::size_t n_atoms) {
  std::vector<Operator> factors;
  factors.reserve(n_atoms);
  for (std::size_t i = 0; i < n_atoms; ++i)
    factors.push_back(i == site ? Operator(op) : Operator::identity(2));
  return tensor(factors);
}

inline Operator collective(const CMatrix& op, std::size_t n_atoms) {
  Operator sum = Operator::zero(Dims(n_atoms, 2));
  for (std::size_t i = 0; i < n_atoms; ++i) sum += site_operator(op, i, n_atoms);
  return sum;
}

}  // namespace ops

/// (omega0/2) sum_i sigma_z(i) on the 2^N dimensional molecular space.
inline Operator molecular_hamiltonian(const ModelSpec& s) {
  validate(s);
  return (0.5 * s.omega0) * ops::collective(ops::sigma_z(), s.n_atoms);
}

/// The molecular factor K of the light-matter coupling K (x) (a + a^+).
inline Operator coupling_operator(const ModelSpec& s) {
  validate(s);
  return ops::collective(ops::sigma_x(), s.n_atoms);
}

inline Operator full_hamiltonian(const ModelSpec& s) {
  const Operator hs = molecular_hamiltonian(s);
  const Operator k = coupling_operator(s);
  const CMatrix a = ops::annihilation(s.photon_trunc);
  const Operator id_m = Operator::identity(s.molecular_dims());
  const Operator id_ph = Operator::identity(s.photon_dim());
  const Operator field(CMatrix(a + a.adjoint()));
  const Operator n_ph(ops::number(s.photon_trunc));
  return tensor(hs, id_ph) + s.omega_c * tensor(id_m, n_ph) + s.g * tensor(k, field);
}

}  // namespace qcme
