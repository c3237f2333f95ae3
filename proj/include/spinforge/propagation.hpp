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

// Piecewise-constant (zero-order hold) propagation of the full system.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "spinforge/matrix_kernel.hpp"
#include "spinforge/spin_model.hpp"

namespace spinforge {

inline constexpr double kBoundSlack = 1e-9;

struct ControlSample {
  double wx = 0.0;  // rad/s
  double wy = 0.0;  // rad/s

  double amplitude() const { return std::hypot(wx, wy); }
  bool operator==(const ControlSample&) const = default;
};

// M samples of width dt; duration M dt.
class PulseSequence {
 public:
  PulseSequence() = default;
  PulseSequence(double dt, std::vector<ControlSample> samples)
      : dt_(dt), samples_(std::move(samples)) {
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw ModelError("PulseSequence: dt must be positive");
    for (const auto& s : samples_) {
      if (!std::isfinite(s.wx) || !std::isfinite(s.wy)) {
        throw ModelError("PulseSequence: non-finite control sample");
      }
    }
  }

  static PulseSequence zeros(double dt, std::size_t steps) {
    return PulseSequence(dt, std::vector<ControlSample>(steps));
  }

  double dt() const { return dt_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double duration() const { return dt_ * static_cast<double>(samples_.size()); }
  const std::vector<ControlSample>& samples() const { return samples_; }
  std::vector<ControlSample>& samples() { return samples_; }
  const ControlSample& operator[](std::size_t j) const { return samples_[j]; }
  ControlSample& operator[](std::size_t j) { return samples_[j]; }

  double max_amplitude() const {
    double m = 0.0;
    for (const auto& s : samples_) m = std::max(m, s.amplitude());
    return m;
  }

  bool operator==(const PulseSequence&) const = default;

 private:
  double dt_ = 1e-6;
  std::vector<ControlSample> samples_;
};

// Scales c down so that its amplitude is at most `bound`, exactly in
// floating point (a plain rescale can overshoot by one ulp).
inline ControlSample clamp_amplitude(ControlSample c, double bound) {
  const double r = c.amplitude();
  if (r > bound) {
    c.wx *= bound / r;
    c.wy *= bound / r;
  }
  while (c.amplitude() > bound) {
    c.wx *= 1.0 - 0x1p-52;
    c.wy *= 1.0 - 0x1p-52;
  }
  return c;
}

inline void check_bound(const PulseSequence& pulse, double bound) {
  for (std::size_t j = 0; j < pulse.size(); ++j) {
    if (pulse[j].amplitude() > bound + kBoundSlack) {
      throw BoundViolation("control sample " + std::to_string(j) + " has amplitude " +
                           std::to_string(pulse[j].amplitude() / bound) +
                           " x bound (must be <= 1)");
    }
  }
}

inline PulseSequence concat(const PulseSequence& a, const PulseSequence& b) {
  if (a.dt() != b.dt()) throw ModelError("concat: pulses on different grids");
  std::vector<ControlSample> s = a.samples();
  s.insert(s.end(), b.samples().begin(), b.samples().end());
  return PulseSequence(a.dt(), std::move(s));
}

// H(wx, wy) = drift + wx ctrl_x + wy ctrl_y, assembled once per system.
struct ControlModel {
  int n_spins;
  ComplexMatrix drift;
  ComplexMatrix ctrl_x;
  ComplexMatrix ctrl_y;
  double bound;

  explicit ControlModel(const SpinSystem& sys)
      : n_spins(sys.n_spins()),
        drift(zeeman_hamiltonian(sys) + j_hamiltonian(sys)),
        ctrl_x(control_operator(sys, SpinAxis::x)),
        ctrl_y(control_operator(sys, SpinAxis::y)),
        bound(sys.control_bound()) {}

  ComplexMatrix hamiltonian(double wx, double wy) const {
    return drift + wx * ctrl_x + wy * ctrl_y;
  }
  ComplexMatrix step(double wx, double wy, double dt) const {
    return HermitianEigen(hamiltonian(wx, wy)).exp_minus_i(dt);
  }
};

inline ComplexMatrix step_propagator(const SpinSystem& sys, double wx, double wy, double dt) {
  if (std::hypot(wx, wy) > sys.control_bound() + kBoundSlack) {
    throw BoundViolation("step_propagator: control exceeds bound");
  }
  return expm_skew(total_hamiltonian(sys, wx, wy), dt);
}

// U(T) = U_M ... U_1
inline ComplexMatrix propagate(const ControlModel& model, const PulseSequence& pulse) {
  ComplexMatrix u = identity(model.drift.rows());
  for (const auto& s : pulse.samples()) u = model.step(s.wx, s.wy, pulse.dt()) * u;
  return u;
}

inline ComplexMatrix propagate(const SpinSystem& sys, const PulseSequence& pulse) {
  check_bound(pulse, sys.control_bound());
  return propagate(ControlModel(sys), pulse);
}

// U(t_0 = 0), U(t_1), ..., U(t_M).
inline std::vector<ComplexMatrix> propagator_history(const SpinSystem& sys,
                                                     const PulseSequence& pulse) {
  check_bound(pulse, sys.control_bound());
  const ControlModel model(sys);
  std::vector<ComplexMatrix> out;
  out.reserve(pulse.size() + 1);
  out.push_back(identity(sys.dim()));
  for (const auto& s : pulse.samples()) out.push_back(model.step(s.wx, s.wy, pulse.dt()) * out.back());
  return out;
}

// U_k(T) of spin k alone, generated by H_c - delta_k H_d (no J).
inline ComplexMatrix propagate_single_spin(const SpinSystem& sys, int k, const PulseSequence& pulse) {
  return propagate(isolated_spin(sys, k), pulse);
}

inline double fidelity(const SpinSystem& sys, const PulseSequence& pulse,
                       const TargetTransformation& target) {
  if (target.n_spins() != sys.n_spins()) throw ModelError("fidelity: spin count mismatch");
  return trace_fidelity(target.composite(), propagate(sys, pulse), sys.n_spins());
}

struct BlochTrajectory {
  int spin = 1;
  std::string initial_state;
  std::vector<double> times;            // seconds
  std::vector<Eigen::Vector3d> vectors; // (x, y, z)
};

// (|0> - i|1>)/sqrt(2) on every spin.
inline ComplexVector default_initial_state(int n_spins) {
  ComplexVector one(2);
  one << 1.0 / std::sqrt(2.0), -kI / std::sqrt(2.0);
  ComplexVector psi = ComplexVector::Ones(1);
  for (int k = 0; k < n_spins; ++k) {
    ComplexVector next(psi.size() * 2);
    for (Eigen::Index i = 0; i < psi.size(); ++i) next.segment(2 * i, 2) = psi(i) * one;
    psi = next;
  }
  return psi;
}

// Reduced Bloch vector 2 (<S_x^k>, <S_y^k>, <S_z^k>) after every step.
inline BlochTrajectory bloch_trajectory(const SpinSystem& sys, const PulseSequence& pulse,
                                        const ComplexVector& initial_state, int k,
                                        std::string tag = "(|0>-i|1>)/sqrt2") {
  if (initial_state.size() != sys.dim()) throw ModelError("bloch_trajectory: state dimension mismatch");
  if (std::abs(initial_state.norm() - 1.0) > 1e-9) {
    throw ModelError("bloch_trajectory: initial state is not normalized");
  }
  check_bound(pulse, sys.control_bound());
  const ComplexMatrix sx = spin_operator(sys, k, SpinAxis::x);
  const ComplexMatrix sy = spin_operator(sys, k, SpinAxis::y);
  const ComplexMatrix sz = spin_operator(sys, k, SpinAxis::z);
  const ControlModel model(sys);

  BlochTrajectory traj;
  traj.spin = k;
  traj.initial_state = std::move(tag);
  auto record = [&](const ComplexVector& psi, double t) {
    traj.times.push_back(t);
    traj.vectors.emplace_back(2.0 * psi.dot(sx * psi).real(), 2.0 * psi.dot(sy * psi).real(),
                              2.0 * psi.dot(sz * psi).real());
  };
  ComplexVector psi = initial_state;
  record(psi, 0.0);
  for (std::size_t j = 0; j < pulse.size(); ++j) {
    psi = model.step(pulse[j].wx, pulse[j].wy, pulse.dt()) * psi;
    record(psi, pulse.dt() * static_cast<double>(j + 1));
  }
  return traj;
}

}  // namespace spinforge
