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

#include <random>

#include <gtest/gtest.h>

#include "spinforge/qpt.hpp"

namespace spinforge {
namespace {

ComplexMatrix random_unitary4(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  ComplexMatrix h(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) h(i, j) = Complex(n(rng), n(rng));
  }
  h = (h + h.adjoint()).eval();
  return expm_skew(h, 1.0);
}

ComplexMatrix sx2() { return 2.0 * pauli(SpinAxis::x); }

TEST(Basis, ElementsAreRealAndOrthogonal) {
  const auto& b = OperatorBasis::instance();
  for (int m = 1; m <= kQptBasisSize; ++m) {
    EXPECT_EQ(b.element(m).imag().norm(), 0.0) << m;
    for (int n = 1; n <= kQptBasisSize; ++n) {
      const Complex g = (b.scaled(m).adjoint() * b.scaled(n)).trace();
      EXPECT_NEAR(std::abs(g - Complex(m == n ? 4.0 : 0.0)), 0.0, 1e-14) << m << "," << n;
    }
  }
}

TEST(Basis, Ordering) {
  const auto& b = OperatorBasis::instance();
  EXPECT_TRUE(b.element(1).isApprox(identity(4)));
  EXPECT_TRUE(b.element(2).isApprox(kron(identity(2), pauli(SpinAxis::x))));
  EXPECT_TRUE(b.element(5).isApprox(kron(pauli(SpinAxis::x), identity(2))));
  EXPECT_TRUE(b.element(16).isApprox(kron(pauli(SpinAxis::z), pauli(SpinAxis::z))));
  EXPECT_DOUBLE_EQ(b.norm(1), 4.0);
  EXPECT_DOUBLE_EQ(b.norm(2), 1.0);
  EXPECT_DOUBLE_EQ(b.norm(6), 0.25);
}

TEST(Chi, IdentityIsASinglePeak) {
  const ProcessMatrix p = chi_from_unitary(identity(4));
  EXPECT_NEAR(std::abs(p.chi(0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(p.chi.squaredNorm(), 1.0, 1e-14);
}

TEST(Chi, PauliOnSecondSpinIsTheSecondElement) {
  const ProcessMatrix p = chi_from_unitary(kron(identity(2), sx2()));
  EXPECT_NEAR(std::abs(p.chi(1, 1) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(p.chi.squaredNorm(), 1.0, 1e-14);
}

TEST(Chi, UnitaryProcessProperties) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ComplexMatrix u = random_unitary4(seed);
    const ProcessMatrix p = chi_from_unitary(u);
    EXPECT_LT((p.chi - p.chi.adjoint()).norm(), 1e-14);
    EXPECT_NEAR(p.chi.trace().real(), 1.0, 1e-13);
    EXPECT_NEAR((p.chi * p.chi.adjoint()).trace().real(), 1.0, 1e-13);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(p.chi);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-13);
    EXPECT_NEAR(es.eigenvalues().maxCoeff(), 1.0, 1e-13);
    EXPECT_LE(es.eigenvalues()(kQptBasisSize - 2), 1e-9 * es.eigenvalues()(kQptBasisSize - 1));  // rank one
    EXPECT_LT((p.completeness() - identity(4)).norm(), 1e-13);
    const ComplexMatrix rho = random_unitary4(seed + 100);  // any operator works
    EXPECT_LT((p.apply(rho) - u * rho * u.adjoint()).norm(), 1e-12);
  }
}

TEST(Chi, GlobalPhaseInvariant) {
  const ComplexMatrix u = random_unitary4(7);
  const ProcessMatrix a = chi_from_unitary(u), b = chi_from_unitary(std::polar(1.0, 0.731) * u);
  EXPECT_LT((a.chi - b.chi).norm(), 1e-14);
}

TEST(Chi, RejectsBadInput) {
  EXPECT_THROW(chi_from_unitary(identity(2)), ModelError);
  EXPECT_THROW(chi_from_unitary(2.0 * identity(4)), ModelError);
  EXPECT_THROW(chi_from_map(ActionImages(3, identity(4))), ModelError);
}

TEST(Chi, LinearInversionMatchesUnitaryFormula) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const ComplexMatrix u = random_unitary4(seed);
    EXPECT_LT((chi_from_map(unitary_action(u)).chi - chi_from_unitary(u).chi).norm(), 1e-13);
  }
}

TEST(Chi, MixtureOfUnitariesAverages) {
  const ComplexMatrix u = random_unitary4(11), v = random_unitary4(12);
  const ActionImages iu = unitary_action(u), iv = unitary_action(v);
  ActionImages mix(iu.size());
  for (std::size_t k = 0; k < iu.size(); ++k) mix[k] = 0.25 * iu[k] + 0.75 * iv[k];
  const ProcessMatrix p = chi_from_map(mix);
  const ComplexMatrix expected = 0.25 * chi_from_unitary(u).chi + 0.75 * chi_from_unitary(v).chi;
  EXPECT_LT((p.chi - expected).norm(), 1e-13);
  EXPECT_LT((p.completeness() - identity(4)).norm(), 1e-13);
  EXPECT_LT((p.chi * p.chi.adjoint()).trace().real(), 1.0);
}

TEST(Fidelity, Examples) {
  const ProcessMatrix id = chi_from_unitary(identity(4));
  const ProcessMatrix flip = chi_from_unitary(kron(identity(2), sx2()));
  EXPECT_NEAR(attenuated_fidelity(id, id), 1.0, 1e-14);
  EXPECT_NEAR(attenuated_fidelity(id, flip), 0.0, 1e-14);
  EXPECT_NEAR(unattenuated_fidelity(id, flip), 0.0, 1e-14);

  ProcessMatrix weak = id;
  weak.chi *= 0.5;
  EXPECT_NEAR(attenuated_fidelity(weak, id), 0.5, 1e-14);
  EXPECT_NEAR(unattenuated_fidelity(weak, id), 1.0, 1e-14);
  EXPECT_EQ(unattenuated_fidelity(ProcessMatrix{}, id), 0.0);
}

TEST(Fidelity, SymmetricAndScaleInvariant) {
  const ProcessMatrix a = chi_from_unitary(random_unitary4(3)), b = chi_from_unitary(random_unitary4(4));
  EXPECT_NEAR(attenuated_fidelity(a, b), attenuated_fidelity(b, a), 1e-15);
  EXPECT_NEAR(unattenuated_fidelity(a, b), unattenuated_fidelity(b, a), 1e-15);
  ProcessMatrix c = a;
  c.chi *= 3.7;
  EXPECT_NEAR(unattenuated_fidelity(c, b), unattenuated_fidelity(a, b), 1e-14);
  EXPECT_LE(unattenuated_fidelity(a, b), 1.0 + 1e-14);
  const double u_overlap = std::norm((random_unitary4(3).adjoint() * random_unitary4(4)).trace()) / 16.0;
  EXPECT_NEAR(attenuated_fidelity(a, b), u_overlap, 1e-13);  // |Tr(u^dagger v)|^2 / 16
}

}  // namespace
}  // namespace spinforge
