#pragma once

// Dense operator algebra on finite tensor-product Hilbert spaces.

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qcme/errors.hpp"

namespace qcme {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;

inline constexpr Complex kI{0.0, 1.0};

inline std::size_t product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string to_string(const Dims& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

inline double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }
inline CMatrix anticommutator(const CMatrix& a, const CMatrix& b) { return a * b + b * a; }

/// Square complex matrix together with the factor dimensions of the space it acts on.
class Operator {
 public:
  Operator() = default;

  explicit Operator(CMatrix m) : m_(std::move(m)), dims_{static_cast<std::size_t>(m_.rows())} {
    check();
  }

  Operator(CMatrix m, Dims dims) : m_(std::move(m)), dims_(std::move(dims)) { check(); }

  static Operator identity(const Dims& dims) {
    const auto d = static_cast<Eigen::Index>(product(dims));
    return {CMatrix::Identity(d, d), dims};
  }
  static Operator identity(std::size_t d) { return identity(Dims{d}); }

  static Operator zero(const Dims& dims) {
    const auto d = static_cast<Eigen::Index>(product(dims));
    return {CMatrix::Zero(d, d), dims};
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const Dims& dims() const noexcept { return dims_; }
  const CMatrix& matrix() const noexcept { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  double hermitian_error() const { return max_abs(m_ - m_.adjoint()); }
  bool is_hermitian(double tol = 1e-12) const { return hermitian_error() <= tol; }

  Operator adjoint() const { return {m_.adjoint(), dims_}; }
  Complex trace() const { return m_.trace(); }

  Operator& operator+=(const Operator& o) {
    require_same_space(o);
    m_ += o.m_;
    return *this;
  }
  Operator& operator-=(const Operator& o) {
    require_same_space(o);
    m_ -= o.m_;
    return *this;
  }
  Operator& operator*=(Complex s) {
    m_ *= s;
    return *this;
  }

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(Complex s, Operator a) { return a *= s; }
  friend Operator operator*(double s, Operator a) { return a *= Complex{s, 0.0}; }
  friend Operator operator*(const Operator& a, const Operator& b) {
    a.require_same_space(b);
    return {a.m_ * b.m_, a.dims_};
  }

 private:
  void check() const {
    if (m_.rows() != m_.cols())
      throw DimensionError("operator matrix must be square, got " + std::to_string(m_.rows()) +
                           "x" + std::to_string(m_.cols()));
    if (dims_.empty() || std::find(dims_.begin(), dims_.end(), 0u) != dims_.end())
      throw DimensionError("subsystem dimensions must be positive");
    if (product(dims_) != dim())
      throw DimensionError("subsystem dims " + to_string(dims_) + " do not multiply to " +
                           std::to_string(dim()));
  }
  void require_same_space(const Operator& o) const {
    if (dims_ != o.dims_)
      throw DimensionError("operator spaces differ: " + to_string(dims_) + " vs " +
                           to_string(o.dims_));
  }

  CMatrix m_;
  Dims dims_;
};

/// Kronecker product; the factor lists are concatenated.
inline Operator tensor(const Operator& a, const Operator& b) {
  const CMatrix& x = a.matrix();
  const CMatrix& y = b.matrix();
  CMatrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return {std::move(out), std::move(dims)};
}

inline Operator tensor(const std::vector<Operator>& factors) {
  if (factors.empty()) throw DimensionError("tensor of an empty factor list");
  Operator out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = tensor(out, factors[i]);
  return out;
}

inline CVector kron(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kHermiticityTolerance = 1e-10;
inline constexpr double kPositivityTolerance = 1e-8;

/// Hermitian, unit-trace, positive semidefinite operator (within the tolerances above).
class DensityMatrix {
 public:
  explicit DensityMatrix(Operator op) : op_(std::move(op)) { validate(); }

  static DensityMatrix pure(const CVector& psi, Dims dims) {
    if (static_cast<std::size_t>(psi.size()) != product(dims))
      throw DimensionError("state vector length does not match dims " + to_string(dims));
    const double n = psi.norm();
    if (std::abs(n - 1.0) > 1e-10)
      throw InvalidStateError("state vector is not normalized (norm " + std::to_string(n) + ")");
    return DensityMatrix(Operator(psi * psi.adjoint(), std::move(dims)));
  }

  const Operator& op() const noexcept { return op_; }
  const CMatrix& matrix() const noexcept { return op_.matrix(); }
  std::size_t dim() const noexcept { return op_.dim(); }
  const Dims& dims() const noexcept { return op_.dims(); }

  double purity() const { return (op_.matrix() * op_.matrix()).trace().real(); }

 private:
  void validate() const {
    const Complex tr = op_.trace();
    if (std::abs(tr - 1.0) > kTraceTolerance)
      throw InvalidStateError("density matrix trace " + std::to_string(tr.real()) + "+" +
                              std::to_string(tr.imag()) + "i differs from 1");
    if (op_.hermitian_error() > kHermiticityTolerance)
      throw InvalidStateError("density matrix is not hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(op_.matrix(), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPositivityTolerance)
      throw InvalidStateError("density matrix has negative eigenvalue " +
                              std::to_string(es.eigenvalues().minCoeff()));
  }

  Operator op_;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> split_leading(const Dims& dims, const Dims& keep) {
  if (keep.empty() || keep.size() > dims.size() ||
      !std::equal(keep.begin(), keep.end(), dims.begin()))
    throw DimensionError("keep dims " + to_string(keep) + " are not a leading factor list of " +
                         to_string(dims));
  const std::size_t kept = product(keep);
  return {kept, product(dims) / kept};
}

}  // namespace detail

/// Traces out every factor after `keep_dims`.
inline DensityMatrix partial_trace_last(const DensityMatrix& rho, const Dims& keep_dims) {
  const auto [kept, traced] = detail::split_leading(rho.dims(), keep_dims);
  const CMatrix& m = rho.matrix();
  const auto dk = static_cast<Eigen::Index>(kept);
  const auto dt = static_cast<Eigen::Index>(traced);
  CMatrix out = CMatrix::Zero(dk, dk);
  for (Eigen::Index i = 0; i < dk; ++i)
    for (Eigen::Index j = 0; j < dk; ++j)
      for (Eigen::Index k = 0; k < dt; ++k) out(i, j) += m(i * dt + k, j * dt + k);
  return DensityMatrix(Operator(std::move(out), keep_dims));
}

/// Reduced matrix tr_rest |psi><psi| of a pure state, without forming the full projector.
inline CMatrix partial_trace_pure(const CVector& psi, const Dims& dims, const Dims& keep_dims) {
  const auto [kept, traced] = detail::split_leading(dims, keep_dims);
  if (static_cast<std::size_t>(psi.size()) != kept * traced)
    throw DimensionError("state vector length does not match dims " + to_string(dims));
  // Column i of the map holds the amplitudes psi(i*traced + k).
  Eigen::Map<const CMatrix> block(psi.data(), static_cast<Eigen::Index>(traced),
                                  static_cast<Eigen::Index>(kept));
  return block.transpose() * block.conjugate();
}

struct Spectrum {
  RVector values;  // ascending
  CMatrix vectors; // columns are eigenvectors
};

inline Spectrum eigendecompose(const Operator& h) {
  const double scale = std::max(1.0, max_abs(h.matrix()));
  if (h.hermitian_error() > 1e-12 * scale)
    throw NotHermitianError("eigendecompose requires a hermitian operator (max|H-H^+| = " +
                            std::to_string(h.hermitian_error()) + ")");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
  if (es.info() != Eigen::Success) throw Error("eigendecomposition did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

/// exp(-i H t) for a fixed hermitian H, from one cached spectral decomposition.
class UnitaryPropagator {
 public:
  explicit UnitaryPropagator(const Operator& h) : dims_(h.dims()), spec_(eigendecompose(h)) {}

  const Spectrum& spectrum() const noexcept { return spec_; }
  const Dims& dims() const noexcept { return dims_; }

  CMatrix unitary(double t) const {
    const CVector phases = (-kI * t * spec_.values.cast<Complex>()).array().exp();
    return spec_.vectors * phases.asDiagonal() * spec_.vectors.adjoint();
  }

  /// Amplitudes of `psi` in the eigenbasis; evolve them with `evolve_coefficients`.
  CVector coefficients(const CVector& psi) const { return spec_.vectors.adjoint() * psi; }

  CVector evolve_coefficients(const CVector& coeffs, double t) const {
    const CVector phases = (-kI * t * spec_.values.cast<Complex>()).array().exp();
    return spec_.vectors * (phases.array() * coeffs.array()).matrix();
  }

  CVector evolve(const CVector& psi, double t) const {
    return evolve_coefficients(coefficients(psi), t);
  }

  DensityMatrix evolve(const DensityMatrix& rho, double t) const {
    if (rho.dims() != dims_) throw DimensionError("state and hamiltonian spaces differ");
    const CMatrix u = unitary(t);
    CMatrix out = u * rho.matrix() * u.adjoint();
    return DensityMatrix(Operator(std::move(out), dims_));
  }

 private:
  Dims dims_;
  Spectrum spec_;
};

/// One step rho -> U rho U^+, U = exp(-i h dt).
inline DensityMatrix evolve_unitary(const Operator& h, double dt, const DensityMatrix& state) {
  return UnitaryPropagator(h).evolve(state, dt);
}

}  // namespace qcme
