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

#include "spinforge/grape.hpp"
#include "spinforge/propagation.hpp"

namespace spinforge {
namespace {

SpinSystem no_j() {
  return SpinSystem::trichloroethylene().with_j_couplings(Eigen::MatrixXd::Zero(2, 2));
}

SpinSystem bare(int n, double bound) {
  const double w0 = kTwoPi * 1e8;
  return SpinSystem(w0, std::vector<double>(static_cast<std::size_t>(n), 0.0), Eigen::MatrixXd::Zero(n, n), w0,
                    bound);
}

TEST(PulseSequence, Invariants) {
  EXPECT_THROW(PulseSequence(0.0, {}), ModelError);
  EXPECT_THROW(PulseSequence(-1e-6, {}), ModelError);
  EXPECT_THROW(PulseSequence(1e-6, {{std::nan(""), 0.0}}), ModelError);
  const PulseSequence p(2e-6, {{3.0, 4.0}, {0.0, 1.0}});
  EXPECT_EQ(p.size(), 2u);
  EXPECT_DOUBLE_EQ(p.duration(), 4e-6);
  EXPECT_DOUBLE_EQ(p.max_amplitude(), 5.0);
  EXPECT_EQ(PulseSequence::zeros(1e-6, 3).max_amplitude(), 0.0);
}

TEST(PulseSequence, BoundCheckNamesSample) {
  const PulseSequence p(1e-6, {{1.0, 0.0}, {0.0, 1.5}, {0.2, 0.2}});
  try {
    check_bound(p, 1.0);
    FAIL() << "expected a bound violation";
  } catch (const BoundViolation& e) {
    EXPECT_NE(std::string(e.what()).find("sample 1"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(check_bound(p, 1.5));
  EXPECT_NO_THROW(check_bound(PulseSequence(1e-6, {{1.0 + 1e-10, 0.0}}), 1.0));  // within slack
}

TEST(StepPropagator, ZeroEverythingIsIdentity) {
  const SpinSystem s = bare(2, 1.0);
  EXPECT_LE((step_propagator(s, 0.0, 0.0, 1e-6) - identity(4)).norm(), 1e-15);
}

TEST(StepPropagator, PiAboutXClosedForm) {
  const double dt = 1e-6, w = kPi / dt;
  const SpinSystem s = bare(1, 2.0 * w);
  // H = -w sigma_x, U = exp(i pi sigma_x) = i tau_x.
  ComplexMatrix expected(2, 2);
  expected << 0.0, kI, kI, 0.0;
  EXPECT_LE((step_propagator(s, w, 0.0, dt) - expected).norm(), 1e-12);
}

TEST(StepPropagator, RejectsBoundViolation) {
  const SpinSystem s = SpinSystem::trichloroethylene();
  EXPECT_THROW(step_propagator(s, 1.01 * s.control_bound(), 0.0, 1e-6), BoundViolation);
}

TEST(StepPropagator, UnitaryForRandomControls) {
  const SpinSystem s = SpinSystem::trichloroethylene();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double r = s.control_bound() * std::abs(u(rng)), th = kPi * u(rng);
    EXPECT_LE(unitarity_deviation(step_propagator(s, r * std::cos(th), r * std::sin(th), 1e-6)), 1e-10);
  }
}

TEST(Propagate, EmptyIsIdentity) {
  EXPECT_EQ(propagate(SpinSystem::trichloroethylene(), PulseSequence(1e-6, {})), identity(4));
}

TEST(Propagate, CommutingStepsCombine) {
  const SpinSystem s = SpinSystem::trichloroethylene();
  const ComplexMatrix two = propagate(s, PulseSequence::zeros(1e-6, 2));
  const ComplexMatrix direct = expm_skew(total_hamiltonian(s, 0.0, 0.0), 2e-6);
  EXPECT_LE((two - direct).norm(), 1e-12);
}

TEST(Propagate, UnitaryOverLongPulses) {
  const SpinSystem s = SpinSystem::trichloroethylene();
  const PulseSequence p = random_pulse(20000, 1e-6, s.control_bound(), 8);
  EXPECT_LE(unitarity_deviation(propagate(s, p)), 1e-9);
}

TEST(Propagate, Composition) {
  const SpinSystem s = SpinSystem::trichloroethylene();
  const PulseSequence a = random_pulse(40, 1e-6, s.control_bound(), 1);
  const PulseSequence b = random_pulse(25, 1e-6, s.control_bound(), 2);
  EXPECT_LE((propagate(s, concat(a, b)) - propagate(s, b) * propagate(s, a)).norm(), 1e-10);
}

TEST(Propagate, HistoryEndsAtFullPropagator) {
  const SpinSystem s = SpinSystem::trichloroethylene();
  const PulseSequence p = random_pulse(10, 1e-6, s.control_bound(), 3);
  const auto h = propagator_history(s, p);
  ASSERT_EQ(h.size(), 11u);
  EXPECT_EQ(h.front(), identity(4));
  EXPECT_LE((h.back() - propagate(s, p)).norm(), 1e-14);
}

TEST(Propagate, FactorizesWithoutCoupling) {
  const SpinSystem s = no_j();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const PulseSequence p = random_pulse(1000, 1e-6, s.control_bound(), seed);
    const ComplexMatrix u = propagate(s, p);
    const ComplexMatrix product = kron(propagate_single_spin(s, 1, p), propagate_single_spin(s, 2, p));
    EXPECT_LE((u - product).norm(), 1e-9);
  }
}

TEST(Fidelity, InheritsTraceFidelity) {
  const SpinSystem s = SpinSystem::trichloroethylene();
  const PulseSequence p = random_pulse(30, 1e-6, s.control_bound(), 4);
  const ComplexMatrix u = propagate(s, p);
  const TargetTransformation id({identity(2), identity(2)});
  EXPECT_NEAR(fidelity(s, p, id), u.trace().real() / 4.0, 1e-14);
  EXPECT_NEAR(fidelity(s, PulseSequence(1e-6, {}), id), 1.0, 1e-15);
  EXPECT_THROW(fidelity(s, p, TargetTransformation({identity(2)})), ModelError);
}

TEST(Bloch, InitialVectors) {
  const SpinSystem s = bare(1, 1.0);
  ComplexVector up(2);
  up << 1.0, 0.0;
  const auto t = bloch_trajectory(s, PulseSequence::zeros(1e-6, 5), up, 1, "|0>");
  for (const auto& v : t.vectors) EXPECT_LE((v - Eigen::Vector3d(0, 0, 1)).norm(), 1e-15);
  EXPECT_EQ(t.initial_state, "|0>");
  const auto d = bloch_trajectory(SpinSystem::trichloroethylene(), PulseSequence(1e-6, {}), default_initial_state(2), 2);
  EXPECT_LE((d.vectors.front() - Eigen::Vector3d(0, -1, 0)).norm(), 1e-15);
}

TEST(Bloch, RejectsBadState) {
  const SpinSystem s = SpinSystem::trichloroethylene();
  EXPECT_THROW(bloch_trajectory(s, PulseSequence(1e-6, {}), ComplexVector::Ones(4), 1), ModelError);
  EXPECT_THROW(bloch_trajectory(s, PulseSequence(1e-6, {}), ComplexVector::Ones(2) / std::sqrt(2.0), 1), ModelError);
}

TEST(Bloch, FreePrecessionRotatesAboutZ) {
  // A spin offset by f Hz precesses by 2 pi f t about +z: H = 2 pi f sigma_z.
  const SpinSystem s = isolated_spin(no_j(), 2);
  const double t = 1.0 / (4.0 * s.shift_angular(1) / kTwoPi);  // quarter period
  const auto m = static_cast<std::size_t>(std::llround(t / 1e-7));
  const auto traj = bloch_trajectory(s, PulseSequence::zeros(t / static_cast<double>(m), m),
                                     default_initial_state(1), 1);
  // (0,-1,0) rotated by +90 degrees about z is (1,0,0).
  EXPECT_LE((traj.vectors.back() - Eigen::Vector3d(1, 0, 0)).norm(), 1e-9);
}

TEST(Bloch, NormConservedWithoutCoupling) {
  const SpinSystem s = no_j();
  const PulseSequence p = random_pulse(10000, 1e-6, s.control_bound(), 5);
  for (int k = 1; k <= 2; ++k) {
    const auto traj = bloch_trajectory(s, p, default_initial_state(2), k);
    ASSERT_EQ(traj.vectors.size(), 10001u);
    double drift = 0.0;
    for (const auto& v : traj.vectors) drift = std::max(drift, std::abs(v.norm() - 1.0));
    EXPECT_LE(drift, 1e-9);
  }
}

TEST(ClampAmplitude, NeverExceedsBoundExactly) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> th(0.0, kTwoPi), scale(0.5, 3.0);
  const double bound = kTwoPi * 12500.0;
  for (int i = 0; i < 100000; ++i) {
    const double t = th(rng), r = bound * scale(rng);
    const ControlSample c = clamp_amplitude({r * std::cos(t), r * std::sin(t)}, bound);
    ASSERT_LE(c.amplitude(), bound);
    if (r > bound) {
      ASSERT_NEAR(c.amplitude(), bound, 1e-12 * bound);
    } else {
      ASSERT_EQ(c.amplitude(), std::hypot(r * std::cos(t), r * std::sin(t)));
    }
  }
}

}  // namespace
}  // namespace spinforge
