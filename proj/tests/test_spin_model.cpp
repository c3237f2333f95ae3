/* Copyright 2026 The SpinForge Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "spinforge/spin_model.hpp"

namespace spinforge {
namespace {

Eigen::MatrixXd no_coupling(int n) { return Eigen::MatrixXd::Zero(n, n); }

SpinSystem plain(int n, double omega0 = kTwoPi * 1e8) {
  return SpinSystem(omega0, std::vector<double>(static_cast<std::size_t>(n), 0.0), no_coupling(n), omega0,
                    kTwoPi * 12500.0);
}

double max_hermiticity(const ComplexMatrix& h) { return hermiticity_deviation(h); }

TEST(SpinSystem, TrichloroethyleneParameters) {
  const SpinSystem s = SpinSystem::trichloroethylene();
  EXPECT_EQ(s.n_spins(), 2);
  EXPECT_EQ(s.dim(), 4);
  EXPECT_NEAR(s.shift_angular(1) / kTwoPi, 11930.18, 1e-8);
  EXPECT_NEAR(s.shift_angular(2) / kTwoPi, 11202.80, 1e-8);
  EXPECT_NEAR(s.control_bound() / kTwoPi, 12500.0, 1e-9);
  EXPECT_DOUBLE_EQ(s.omega_rf(), s.omega0());
  EXPECT_DOUBLE_EQ(s.max_j_hz(), 103.49);
}

TEST(SpinSystem, ValidationRejectsBadParameters) {
  EXPECT_THROW(SpinSystem(1.0, {0.02}, no_coupling(1), 1.0, 1.0), ModelError);   // |delta| too large
  EXPECT_THROW(SpinSystem(1.0, {0.0}, no_coupling(1), 1.0, 0.0), ModelError);    // bound
  Eigen::MatrixXd asym(2, 2);
  asym << 0.0, 1.0, 2.0, 0.0;
  EXPECT_THROW(SpinSystem(1.0, {0.0, 0.0}, asym, 1.0, 1.0), ModelError);
  Eigen::MatrixXd diag(2, 2);
  diag << 1.0, 0.0, 0.0, 0.0;
  EXPECT_THROW(SpinSystem(1.0, {0.0, 0.0}, diag, 1.0, 1.0), ModelError);
  EXPECT_THROW(SpinSystem(1.0, {}, no_coupling(0), 1.0, 1.0), ModelError);
}

TEST(SpinOperator, Examples) {
  EXPECT_EQ(spin_operator(1, 1, SpinAxis::z), pauli(SpinAxis::z));
  EXPECT_EQ(spin_operator(2, 2, SpinAxis::x), kron(identity(2), pauli(SpinAxis::x)));
  for (int n = 1; n <= 3; ++n) {
    for (int k = 1; k <= n; ++k) {
      for (SpinAxis a : {SpinAxis::x, SpinAxis::y, SpinAxis::z}) {
        EXPECT_LE(std::abs(spin_operator(n, k, a).trace()), 1e-15);
      }
    }
  }
  EXPECT_THROW(spin_operator(2, 3, SpinAxis::x), ModelError);
  EXPECT_THROW(spin_operator(2, 0, SpinAxis::x), ModelError);
}

TEST(Zeeman, OnResonanceWithoutShiftsIsZero) { EXPECT_EQ(zeeman_hamiltonian(plain(2)).norm(), 0.0); }

TEST(Zeeman, SingleShiftedSpin) {
  const double w0 = kTwoPi * 1e8;
  const SpinSystem s(w0, {kTwoPi * 11930.18 / w0}, no_coupling(1), w0, 1.0);
  const ComplexMatrix expected = kTwoPi * 11930.18 * pauli(SpinAxis::z);
  EXPECT_LE((zeeman_hamiltonian(s) - expected).norm(), 1e-9);
}

TEST(Zeeman, TwoSpinDiagonalAssembly) {
  const SpinSystem s = SpinSystem::trichloroethylene();
  const ComplexMatrix h = zeeman_hamiltonian(s);
  const double f1 = kTwoPi * 11930.18, f2 = kTwoPi * 11202.80;
  // -[(1-d)w0 - w0] S_z = d w0 S_z; basis |00>,|01>,|10>,|11> with S_z = +-1/2.
  const double expected[4] = {0.5 * (f1 + f2), 0.5 * (f1 - f2), 0.5 * (-f1 + f2), -0.5 * (f1 + f2)};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(h(i, i).real(), expected[i], 1e-8);
  ComplexMatrix off = h;
  off.diagonal().setZero();
  EXPECT_EQ(off.norm(), 0.0);
}

TEST(JCoupling, ZeroWithoutCouplings) { EXPECT_EQ(j_hamiltonian(plain(2)).norm(), 0.0); }

TEST(JCoupling, IsotropicTwoSpinForm) {
  const SpinSystem s = SpinSystem::trichloroethylene();
  const ComplexMatrix h = j_hamiltonian(s);
  const double a = kTwoPi * 103.49;
  // Assembled by hand: S1.S2 in the |00>,|01>,|10>,|11> basis.
  ComplexMatrix dot = ComplexMatrix::Zero(4, 4);
  dot(0, 0) = dot(3, 3) = 0.25;
  dot(1, 1) = dot(2, 2) = -0.25;
  dot(1, 2) = dot(2, 1) = 0.5;
  EXPECT_LE((h - a * dot).norm(), 1e-9);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  EXPECT_NEAR(es.eigenvalues()(0), -0.75 * a, 1e-9);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(es.eigenvalues()(i), 0.25 * a, 1e-9);
}

TEST(JCoupling, CommutesWithTotalSz) {
  const SpinSystem s = SpinSystem::trichloroethylene();
  const ComplexMatrix h = j_hamiltonian(s);
  const ComplexMatrix sz = spin_operator(s, 1, SpinAxis::z) + spin_operator(s, 2, SpinAxis::z);
  EXPECT_LE((h * sz - sz * h).norm(), 1e-12);
}

TEST(JCoupling, SingleSpinIsZero) {
  EXPECT_EQ(j_hamiltonian(isolated_spin(SpinSystem::trichloroethylene(), 1)).norm(), 0.0);
}

TEST(Rf, Examples) {
  const SpinSystem s = plain(1);
  EXPECT_EQ(rf_hamiltonian(s, 0.0, 0.0).norm(), 0.0);
  const double omega = s.control_bound();
  EXPECT_LE((rf_hamiltonian(s, omega, 0.0) + omega * pauli(SpinAxis::x)).norm(), 1e-9);
  const SpinSystem t = SpinSystem::trichloroethylene();
  EXPECT_LE((rf_hamiltonian(t, 2.0 * 300.0, 2.0 * -700.0) - 2.0 * rf_hamiltonian(t, 300.0, -700.0)).norm(), 1e-9);
}

TEST(Rf, KeepsOneMinusDelta) {
  const SpinSystem s = SpinSystem::trichloroethylene();
  const ComplexMatrix expected = -(1.0 - s.shift(1)) * 5.0 * spin_operator(s, 1, SpinAxis::y) -
                                 (1.0 - s.shift(2)) * 5.0 * spin_operator(s, 2, SpinAxis::y);
  EXPECT_LE((rf_hamiltonian(s, 0.0, 5.0) - expected).norm(), 1e-15);
}

TEST(Total, SumOfParts) {
  EXPECT_EQ(total_hamiltonian(plain(2), 0.0, 0.0).norm(), 0.0);
  const SpinSystem s = SpinSystem::trichloroethylene();
  const double w = kTwoPi * 12500.0;
  const ComplexMatrix h = total_hamiltonian(s, w, 0.0);
  const ComplexMatrix parts = zeeman_hamiltonian(s) + j_hamiltonian(s) + rf_hamiltonian(s, w, 0.0);
  EXPECT_LE((h - parts).cwiseAbs().maxCoeff(), 1e-14 * h.cwiseAbs().maxCoeff());
  EXPECT_LE(max_hermiticity(h), 1e-12);
}

TEST(SingleSpin, HcHd) {
  const SpinSystem s = SpinSystem::trichloroethylene();
  EXPECT_EQ(single_spin_hc(s, 0.0, 0.0).norm(), 0.0);
  EXPECT_LE((single_spin_hd(s, 0.0, 0.0) + s.omega0() * pauli(SpinAxis::z)).norm(), 1e-6);
  const double w = kTwoPi * 12500.0;
  const ComplexMatrix expected = -kTwoPi * 1e8 * pauli(SpinAxis::z) - kTwoPi * 1.25e4 * pauli(SpinAxis::x);
  EXPECT_LE((single_spin_hd(s, w, 0.0) - expected).norm(), 1e-6);
  // Off resonance H_c picks up (w_rf - w0) sigma_z.
  const SpinSystem off(s.omega0(), s.chemical_shifts(), s.j_couplings_hz(), s.omega0() + 1000.0, s.control_bound());
  EXPECT_LE((single_spin_hc(off, 0.0, 0.0) - 1000.0 * pauli(SpinAxis::z)).norm(), 1e-6);
}

TEST(SingleSpin, MatchesIsolatedFullHamiltonian) {
  const SpinSystem s = SpinSystem::trichloroethylene();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-s.control_bound(), s.control_bound());
  for (int trial = 0; trial < 20; ++trial) {
    const double wx = u(rng), wy = u(rng);
    for (int k = 1; k <= 2; ++k) {
      const ComplexMatrix full = total_hamiltonian(isolated_spin(s, k), wx, wy);
      const ComplexMatrix eff = single_spin_hamiltonian(s, k, wx, wy);
      EXPECT_LE((full - eff).norm(), 1e-12 * s.omega0());
      EXPECT_LE(max_hermiticity(eff), 1e-12);
    }
  }
}

TEST(SingleSpin, IsolatedSpinKeepsParameters) {
  const SpinSystem s = SpinSystem::trichloroethylene();
  const SpinSystem one = isolated_spin(s, 2);
  EXPECT_EQ(one.n_spins(), 1);
  EXPECT_EQ(one.shift(1), s.shift(2));
  EXPECT_EQ(one.control_bound(), s.control_bound());
}

TEST(Target, CompositeIsKron) {
  const ComplexMatrix rz = rotation(SpinAxis::z, kPi / 2);
  const TargetTransformation t({identity(2), rz}, "I x Rz(90)");
  EXPECT_EQ(t.n_spins(), 2);
  EXPECT_LE((t.composite() - kron(identity(2), rz)).norm(), 1e-12);
  EXPECT_EQ(t.factor(2), rz);
  EXPECT_THROW(TargetTransformation({2.0 * identity(2)}), ModelError);
  EXPECT_THROW(TargetTransformation({identity(4)}), ModelError);
  EXPECT_THROW(TargetTransformation({}), ModelError);
}

TEST(Rotation, IsExpOfHalfPauli) {
  const ComplexMatrix r = rotation(SpinAxis::z, kPi / 2);
  EXPECT_NEAR(r(0, 0).real(), std::cos(kPi / 4), 1e-15);
  EXPECT_NEAR(r(0, 0).imag(), -std::sin(kPi / 4), 1e-15);
}

TEST(Hamiltonians, AllHermitian) {
  const SpinSystem s = SpinSystem::trichloroethylene();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-s.control_bound(), s.control_bound());
  for (int trial = 0; trial < 20; ++trial) {
    const double wx = u(rng), wy = u(rng);
    EXPECT_LE(max_hermiticity(zeeman_hamiltonian(s)), 1e-12);
    EXPECT_LE(max_hermiticity(j_hamiltonian(s)), 1e-12);
    EXPECT_LE(max_hermiticity(rf_hamiltonian(s, wx, wy)), 1e-12);
    EXPECT_LE(max_hermiticity(total_hamiltonian(s, wx, wy)), 1e-12);
  }
}

TEST(FromHz, CarrierAndShifts) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2, 2);
  const SpinSystem s = SpinSystem::from_hz(5e7, {100.0, -50.0}, j, 1000.0, 5e7 + 10.0);
  EXPECT_NEAR(s.shift(1) * s.omega0() / kTwoPi, 100.0, 1e-9);
  EXPECT_NEAR((s.omega_rf() - s.omega0()) / kTwoPi, 10.0, 1e-6);
}

}  // namespace
}  // namespace spinforge
