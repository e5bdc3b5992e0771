#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "qcme/models.hpp"

using namespace qcme;

namespace {

ModelSpec rabi(double wc, double g, std::size_t trunc) {
  return {ModelKind::Rabi, 1, 1.0, wc, g, trunc};
}

ModelSpec dicke(std::size_t n, double wc, double g, std::size_t trunc) {
  return {ModelKind::Dicke, n, 1.0, wc, g, trunc};
}

/// Basis permutation of the full space that swaps atoms i and j.
CMatrix swap_atoms(std::size_t n_atoms, std::size_t i, std::size_t j, std::size_t photon_dim) {
  const std::size_t dm = std::size_t{1} << n_atoms;
  const auto d = static_cast<Eigen::Index>(dm * photon_dim);
  CMatrix p = CMatrix::Zero(d, d);
  for (std::size_t b = 0; b < dm; ++b) {
    const std::size_t bi = (b >> (n_atoms - 1 - i)) & 1u;
    const std::size_t bj = (b >> (n_atoms - 1 - j)) & 1u;
    std::size_t s = b & ~(std::size_t{1} << (n_atoms - 1 - i)) & ~(std::size_t{1} << (n_atoms - 1 - j));
    s |= bj << (n_atoms - 1 - i);
    s |= bi << (n_atoms - 1 - j);
    for (std::size_t k = 0; k < photon_dim; ++k)
      p(static_cast<Eigen::Index>(s * photon_dim + k), static_cast<Eigen::Index>(b * photon_dim + k)) = 1.0;
  }
  return p;
}

}  // namespace

TEST(MolecularHamiltonian, RabiIsHalfSigmaZ) {
  const Operator h = molecular_hamiltonian(rabi(0.75, 0.01, 5));
  CMatrix expected = CMatrix::Zero(2, 2);
  expected(0, 0) = 0.5;
  expected(1, 1) = -0.5;
  EXPECT_EQ(h.matrix(), expected);
}

TEST(MolecularHamiltonian, DickeBinomialSpectrum) {
  const Operator h = molecular_hamiltonian(dicke(4, 0.75, 0.01, 5));
  std::map<long, int> counts;
  for (Eigen::Index k = 0; k < 16; ++k) counts[std::lround(h(k, k).real())]++;
  EXPECT_EQ(counts, (std::map<long, int>{{-2, 1}, {-1, 4}, {0, 6}, {1, 4}, {2, 1}}));
  EXPECT_EQ(max_abs(h.matrix() - CMatrix(h.matrix().diagonal().asDiagonal())), 0.0);
}

TEST(MolecularHamiltonian, Traceless) {
  for (std::size_t n = 1; n <= 5; ++n) {
    const ModelSpec s = n == 1 ? rabi(1.0, 0.0, 1) : dicke(n, 1.0, 0.0, 1);
    EXPECT_EQ(molecular_hamiltonian(s).trace(), Complex(0.0)) << n;
  }
}

TEST(CouplingOperator, RabiSigmaX) {
  EXPECT_EQ(coupling_operator(rabi(1.0, 0.1, 1)).matrix(), ops::sigma_x());
}

TEST(CouplingOperator, DickeTwoAtoms) {
  const Operator k = coupling_operator(dicke(2, 1.0, 0.1, 1));
  const Operator x(ops::sigma_x());
  const Operator expected = tensor(x, Operator::identity(2)) + tensor(Operator::identity(2), x);
  EXPECT_EQ(k.matrix(), expected.matrix());
  EXPECT_EQ(k.trace(), Complex(0.0));
  EXPECT_TRUE(k.is_hermitian(0.0));
}

TEST(CouplingOperator, DickeSpectralNormIsN) {
  for (std::size_t n = 2; n <= 5; ++n) {
    const Spectrum s = eigendecompose(coupling_operator(dicke(n, 1.0, 0.1, 1)));
    EXPECT_NEAR(s.values.cwiseAbs().maxCoeff(), static_cast<double>(n), 1e-12) << n;
  }
}

TEST(FullHamiltonian, DecoupledRabiSpectrum) {
  const double wc = 0.75;
  const std::size_t trunc = 6;
  const Spectrum s = eigendecompose(full_hamiltonian(rabi(wc, 0.0, trunc)));
  std::vector<double> expected;
  for (std::size_t m = 0; m <= trunc; ++m)
    for (double e : {-0.5, 0.5}) expected.push_back(e + wc * static_cast<double>(m));
  std::sort(expected.begin(), expected.end());
  for (std::size_t k = 0; k < expected.size(); ++k)
    EXPECT_NEAR(s.values(static_cast<Eigen::Index>(k)), expected[k], 1e-14);
}

TEST(FullHamiltonian, LadderMatrixElement) {
  const double g = 0.37;
  const Operator h = full_hamiltonian(rabi(0.9, g, 1));
  // |e,0> = index 0, |g,1> = index 3.
  EXPECT_NEAR(std::abs(h(0, 3) - Complex(g, 0.0)), 0.0, 1e-16);
  EXPECT_EQ(h(0, 3), h(3, 0));
  EXPECT_EQ(h.hermitian_error(), 0.0);
}

TEST(FullHamiltonian, ExactlyHermitian) {
  for (const ModelSpec& s : {rabi(0.75, 0.01, 20), dicke(4, 0.9, 0.005, 10)})
    EXPECT_EQ(full_hamiltonian(s).hermitian_error(), 0.0);
}

TEST(FullHamiltonian, CommutesWithFreePartAtZeroCoupling) {
  const ModelSpec s = dicke(3, 0.8, 0.0, 8);
  const Operator h = full_hamiltonian(s);
  const Operator free = tensor(molecular_hamiltonian(s), Operator::identity(s.photon_dim())) +
                        s.omega_c * tensor(Operator::identity(s.molecular_dims()), Operator(ops::number(8)));
  EXPECT_LE(max_abs(commutator(h.matrix(), free.matrix())), 1e-14);
}

TEST(FullHamiltonian, DickePermutationInvariance) {
  const ModelSpec s = dicke(4, 0.75, 0.015, 5);
  const CMatrix h = full_hamiltonian(s).matrix();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) {
      const CMatrix p = swap_atoms(4, i, j, s.photon_dim());
      EXPECT_LE(max_abs(p * h * p.adjoint() - h), 1e-14) << i << "," << j;
    }
}

TEST(FullHamiltonian, RabiParityConserved) {
  const ModelSpec s = rabi(0.75, 0.3, 15);
  CMatrix parity_ph = CMatrix::Zero(16, 16);
  for (Eigen::Index n = 0; n < 16; ++n) parity_ph(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
  const Operator parity = tensor(Operator(ops::sigma_z()), Operator(parity_ph));
  EXPECT_LE(max_abs(commutator(full_hamiltonian(s).matrix(), parity.matrix())), 1e-12);
}

TEST(ModelValidation, RejectsInvalidSpecs) {
  const auto key_of = [](const ModelSpec& s) {
    try {
      validate(s);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string();
  };
  EXPECT_EQ(key_of(rabi(0.75, -0.01, 5)), "model.g");
  EXPECT_EQ(key_of(rabi(0.0, 0.01, 5)), "model.omega_c");
  EXPECT_EQ(key_of({ModelKind::Rabi, 2, 1.0, 1.0, 0.1, 5}), "model.n_atoms");
  EXPECT_EQ(key_of(dicke(0, 1.0, 0.1, 5)), "model.n_atoms");
  EXPECT_EQ(key_of(rabi(0.75, 0.01, 0)), "");
  try {
    validate(rabi(0.75, -0.01, 5));
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("g >= 0"), std::string::npos);
  }
}

TEST(Operators, LadderAlgebra) {
  const CMatrix a = ops::annihilation(10);
  const CMatrix comm = commutator(a, a.adjoint());
  // [a, a^+] = 1 except at the cutoff level.
  for (Eigen::Index n = 0; n < 10; ++n) EXPECT_NEAR(comm(n, n).real(), 1.0, 1e-14);
  EXPECT_NEAR(comm(10, 10).real(), -10.0, 1e-13);
  EXPECT_LE(max_abs(a.adjoint() * a - ops::number(10)), 1e-14);
}

TEST(Operators, SiteOperatorPlacement) {
  const Operator z1 = ops::site_operator(ops::sigma_z(), 0, 3);
  // Site 0 is the leading factor: basis index 4 = |g e e> has sigma_z(0) = -1.
  EXPECT_EQ(z1(4, 4), Complex(-1.0));
  EXPECT_EQ(z1(3, 3), Complex(1.0));
}
