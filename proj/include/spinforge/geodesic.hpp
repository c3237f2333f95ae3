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

// Two-timescale analysis of homonuclear pairs: the relative motion
// V = U_1^dagger U_2 moves slowly at speed |delta_1 - delta_2| omega0 / sqrt(2)
// under the bi-invariant metric <X, Y> = Tr(X^dagger Y), so the shortest
// duration able to reach V(T) = U_1f^dagger U_2f is its geodesic distance
// divided by that speed.

#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "spinforge/matrix_kernel.hpp"
#include "spinforge/propagation.hpp"
#include "spinforge/spin_model.hpp"

namespace spinforge {

// Ratio that "much greater than" must exceed in the two-timescale assumption.
inline constexpr double kAssumptionRatio = 10.0;

struct GeodesicEstimate {
  double geodesic_length = 0.0;  // ||log(U_1f^dagger U_2f)||_F
  double relative_speed = 0.0;   // rad/s
  double t_geodesic = 0.0;       // s
  double control_ratio = 0.0;    // Omega / (|delta_1 - delta_2| omega0)
  double coupling_ratio = 0.0;   // |delta_1 - delta_2| omega0 / (2 pi J_max)
  bool assumption_ok = false;
};

namespace detail {

// Removes a U(1) phase so that det = 1, picking the shorter of the two
// SU(2) representatives.
inline ComplexMatrix to_su2(const ComplexMatrix& u) {
  const Complex det = u.determinant();
  if (std::abs(det - 1.0) <= kDeterminantTol) return u;
  const ComplexMatrix a = u / std::sqrt(det);
  const double ca = a.trace().real(), cb = -ca;
  return ca >= cb ? a : ComplexMatrix(-a);
}

}  // namespace detail

inline double relative_rotation_length(const ComplexMatrix& u1, const ComplexMatrix& u2) {
  return frobenius_norm(logm_su2(detail::to_su2(u1.adjoint() * u2)));
}

inline double geodesic_length(const TargetTransformation& target) {
  if (target.n_spins() != 2) {
    throw UnsupportedError("geodesic_length: only two-spin targets are supported");
  }
  return relative_rotation_length(target.factor(1), target.factor(2));
}

inline GeodesicEstimate estimate_min_time(const SpinSystem& sys, const TargetTransformation& target) {
  if (sys.n_spins() != 2 || target.n_spins() != 2) {
    throw UnsupportedError("estimate_min_time: only two-spin systems are supported");
  }
  const double split = std::abs(sys.shift(1) - sys.shift(2)) * sys.omega0();
  if (split == 0.0) {
    throw DegenerateError("estimate_min_time: spins have identical chemical shifts");
  }
  GeodesicEstimate e;
  e.geodesic_length = geodesic_length(target);
  e.relative_speed = split / std::sqrt(2.0);
  e.t_geodesic = e.geodesic_length / e.relative_speed;
  e.control_ratio = sys.control_bound() / split;
  const double j = sys.max_j_hz();
  e.coupling_ratio = j > 0.0 ? split / (kTwoPi * j) : std::numeric_limits<double>::infinity();
  e.assumption_ok = e.control_ratio >= kAssumptionRatio && e.coupling_ratio >= kAssumptionRatio;
  return e;
}

// V_k(t_j) = U_1(t_j)^dagger U_k(t_j) for k = 2..N, with U_k generated by
// H_c - delta_k H_d. Within one step the controls are constant, so
//   V_k(t_{j+1}) = U_1(t_j)^dagger [e^{+i H_1 dt} e^{-i H_k dt}] U_1(t_j) V_k(t_j)
// is the exact solution of dV/dt = -i (delta_1 - delta_k) U_1^dagger H_d U_1 V.
// Result is indexed [k - 2][j].
inline std::vector<std::vector<ComplexMatrix>> relative_motion_trajectory(const SpinSystem& sys,
                                                                          const PulseSequence& pulse) {
  check_bound(pulse, sys.control_bound());
  const int n = sys.n_spins();
  std::vector<std::vector<ComplexMatrix>> out(static_cast<std::size_t>(std::max(n - 1, 0)));
  for (auto& v : out) {
    v.reserve(pulse.size() + 1);
    v.push_back(identity(2));
  }
  ComplexMatrix u1 = identity(2);
  for (const auto& s : pulse.samples()) {
    const ComplexMatrix step1 = expm_skew(single_spin_hamiltonian(sys, 1, s.wx, s.wy), pulse.dt());
    for (int k = 2; k <= n; ++k) {
      const ComplexMatrix stepk = expm_skew(single_spin_hamiltonian(sys, k, s.wx, s.wy), pulse.dt());
      const ComplexMatrix w = u1.adjoint() * (step1.adjoint() * stepk) * u1;
      auto& traj = out[static_cast<std::size_t>(k - 2)];
      traj.push_back(w * traj.back());
    }
    u1 = step1 * u1;
  }
  return out;
}

// Arc length of V(t) = U_1^dagger U_2: sum_j dt |delta_1 - delta_2| ||H_d(j)||_F.
// Conjugation by U_1 leaves the Frobenius norm unchanged.
inline double path_length(const SpinSystem& sys, const PulseSequence& pulse) {
  if (sys.n_spins() < 2) throw UnsupportedError("path_length: need at least two spins");
  const double dd = std::abs(sys.shift(1) - sys.shift(2));
  double total = 0.0;
  for (const auto& s : pulse.samples()) {
    total += pulse.dt() * dd * frobenius_norm(single_spin_hd(sys, s.wx, s.wy));
  }
  return total;
}

}  // namespace spinforge
