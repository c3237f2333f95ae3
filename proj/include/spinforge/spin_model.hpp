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

// Rotating-frame model of N homonuclear spins-1/2.
//
//   H_Z  = -sum_k [(1 - delta_k) omega0 - omega_rf] S_z^k
//   H_J  =  sum_{i<j} 2 pi J_ij (S_x^i S_x^j + S_y^i S_y^j + S_z^i S_z^j)
//   H_RF = -sum_k (1 - delta_k) [wx S_x^k + wy S_y^k]
//
// All frequencies are angular (rad/s) internally; J is kept in Hz as it is
// always multiplied by 2 pi at assembly.

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spinforge/matrix_kernel.hpp"

namespace spinforge {

inline constexpr double kDefaultLarmorHz = 100.0e6;

class SpinSystem {
 public:
  SpinSystem(double omega0, std::vector<double> chemical_shifts, Eigen::MatrixXd j_couplings_hz,
             double omega_rf, double control_bound)
      : omega0_(omega0),
        shifts_(std::move(chemical_shifts)),
        j_hz_(std::move(j_couplings_hz)),
        omega_rf_(omega_rf),
        bound_(control_bound) {
    validate();
  }

  // Builds a system from lab units. Shift frequencies f_k are the offsets
  // delta_k omega0 / 2 pi. The carrier defaults to omega0.
  static SpinSystem from_hz(double larmor_hz, const std::vector<double>& shifts_hz,
                            const Eigen::MatrixXd& j_hz, double bound_hz,
                            std::optional<double> carrier_hz = std::nullopt) {
    const double omega0 = kTwoPi * larmor_hz;
    std::vector<double> shifts;
    shifts.reserve(shifts_hz.size());
    for (double f : shifts_hz) shifts.push_back(kTwoPi * f / omega0);
    const double omega_rf = carrier_hz ? kTwoPi * *carrier_hz : omega0;
    return SpinSystem(omega0, std::move(shifts), j_hz, omega_rf, kTwoPi * bound_hz);
  }

  // The two carbon spins of trichloroethylene at a 100 MHz carbon frequency.
  static SpinSystem trichloroethylene() {
    Eigen::MatrixXd j(2, 2);
    j << 0.0, 103.49, 103.49, 0.0;
    return from_hz(kDefaultLarmorHz, {11930.18, 11202.80}, j, 12500.0);
  }

  int n_spins() const { return static_cast<int>(shifts_.size()); }
  Eigen::Index dim() const { return Eigen::Index{1} << n_spins(); }
  double omega0() const { return omega0_; }
  double omega_rf() const { return omega_rf_; }
  double control_bound() const { return bound_; }
  const std::vector<double>& chemical_shifts() const { return shifts_; }
  const Eigen::MatrixXd& j_couplings_hz() const { return j_hz_; }

  // delta_k (1-based spin index).
  double shift(int k) const { return shifts_.at(static_cast<std::size_t>(k - 1)); }
  // delta_k omega0 in rad/s.
  double shift_angular(int k) const { return shift(k) * omega0_; }

  double max_j_hz() const {
    return j_hz_.size() == 0 ? 0.0 : j_hz_.cwiseAbs().maxCoeff();
  }

  SpinSystem with_control_bound(double bound) const {
    SpinSystem s = *this;
    s.bound_ = bound;
    s.validate();
    return s;
  }

  // Shifts every delta_k omega0 by the same angular offset.
  SpinSystem with_shift_offset(double offset_angular) const {
    SpinSystem s = *this;
    for (double& d : s.shifts_) d += offset_angular / omega0_;
    s.validate();
    return s;
  }

  SpinSystem with_j_couplings(Eigen::MatrixXd j_hz) const {
    SpinSystem s = *this;
    s.j_hz_ = std::move(j_hz);
    s.validate();
    return s;
  }

 private:
  void validate() const {
    const auto n = static_cast<Eigen::Index>(shifts_.size());
    if (n < 1 || n > 10) throw ModelError("SpinSystem: need 1 to 10 spins");
    if (!(omega0_ > 0.0) || !std::isfinite(omega0_)) {
      throw ModelError("SpinSystem: Larmor frequency must be positive");
    }
    if (!(bound_ > 0.0) || !std::isfinite(bound_)) {
      throw ModelError("SpinSystem: control bound must be positive");
    }
    if (!std::isfinite(omega_rf_)) throw ModelError("SpinSystem: carrier must be finite");
    for (double d : shifts_) {
      if (!std::isfinite(d) || std::abs(d) >= 0.01) {
        throw ModelError("SpinSystem: chemical shifts must satisfy |delta| < 0.01");
      }
    }
    if (j_hz_.rows() != n || j_hz_.cols() != n) {
      throw ModelError("SpinSystem: J matrix must be N x N");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (j_hz_(i, i) != 0.0) throw ModelError("SpinSystem: J diagonal must be zero");
      for (Eigen::Index k = 0; k < n; ++k) {
        if (!std::isfinite(j_hz_(i, k)) || j_hz_(i, k) != j_hz_(k, i)) {
          throw ModelError("SpinSystem: J matrix must be symmetric and finite");
        }
      }
    }
  }

  double omega0_;
  std::vector<double> shifts_;
  Eigen::MatrixXd j_hz_;
  double omega_rf_;
  double bound_;
};

// exp(-i angle sigma_axis): rotation of the Bloch vector by `angle`.
inline ComplexMatrix rotation(SpinAxis axis, double angle) {
  return expm_skew(pauli(axis), angle);
}

// Local target U_f = U_1f (x) ... (x) U_Nf with its factors kept.
class TargetTransformation {
 public:
  explicit TargetTransformation(std::vector<ComplexMatrix> factors, std::string label = {})
      : factors_(std::move(factors)), label_(std::move(label)) {
    if (factors_.empty()) throw ModelError("TargetTransformation: no factors");
    composite_ = ComplexMatrix::Identity(1, 1);
    for (const auto& f : factors_) {
      if (f.rows() != 2 || f.cols() != 2 || !f.allFinite()) {
        throw ModelError("TargetTransformation: factors must be 2x2");
      }
      if (unitarity_deviation(f) > kHermitianTol) {
        throw ModelError("TargetTransformation: factor is not unitary");
      }
      composite_ = kron(composite_, f);
    }
  }

  int n_spins() const { return static_cast<int>(factors_.size()); }
  const std::vector<ComplexMatrix>& factors() const { return factors_; }
  const ComplexMatrix& factor(int k) const { return factors_.at(static_cast<std::size_t>(k - 1)); }
  const ComplexMatrix& composite() const { return composite_; }
  const std::string& label() const { return label_; }

 private:
  std::vector<ComplexMatrix> factors_;
  ComplexMatrix composite_;
  std::string label_;
};

// S_axis^k = I^(k-1) (x) sigma_axis (x) I^(N-k), k is 1-based.
inline ComplexMatrix spin_operator(int n_spins, int k, SpinAxis axis) {
  if (k < 1 || k > n_spins) throw ModelError("spin_operator: spin index out of range");
  const Eigen::Index left = Eigen::Index{1} << (k - 1);
  const Eigen::Index right = Eigen::Index{1} << (n_spins - k);
  return kron(kron(identity(left), pauli(axis)), identity(right));
}

inline ComplexMatrix spin_operator(const SpinSystem& sys, int k, SpinAxis axis) {
  return spin_operator(sys.n_spins(), k, axis);
}

inline ComplexMatrix zeeman_hamiltonian(const SpinSystem& sys) {
  ComplexMatrix h = ComplexMatrix::Zero(sys.dim(), sys.dim());
  for (int k = 1; k <= sys.n_spins(); ++k) {
    // (1 - delta) w0 - w_rf, ordered to avoid cancelling two ~w0 terms.
    const double w = (sys.omega0() - sys.omega_rf()) - sys.shift(k) * sys.omega0();
    h -= w * spin_operator(sys, k, SpinAxis::z);
  }
  return h;
}

inline ComplexMatrix j_hamiltonian(const SpinSystem& sys) {
  ComplexMatrix h = ComplexMatrix::Zero(sys.dim(), sys.dim());
  const int n = sys.n_spins();
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      const double jij = sys.j_couplings_hz()(i - 1, j - 1);
      if (jij == 0.0) continue;
      for (SpinAxis a : {SpinAxis::x, SpinAxis::y, SpinAxis::z}) {
        h += (kTwoPi * jij) * (spin_operator(sys, i, a) * spin_operator(sys, j, a));
      }
    }
  }
  return h;
}

// -sum_k (1 - delta_k) S_axis^k: the coefficient of wx (axis x) or wy (axis y).
inline ComplexMatrix control_operator(const SpinSystem& sys, SpinAxis axis) {
  ComplexMatrix h = ComplexMatrix::Zero(sys.dim(), sys.dim());
  for (int k = 1; k <= sys.n_spins(); ++k) {
    h -= (1.0 - sys.shift(k)) * spin_operator(sys, k, axis);
  }
  return h;
}

inline ComplexMatrix rf_hamiltonian(const SpinSystem& sys, double wx, double wy) {
  return wx * control_operator(sys, SpinAxis::x) + wy * control_operator(sys, SpinAxis::y);
}

inline ComplexMatrix total_hamiltonian(const SpinSystem& sys, double wx, double wy) {
  return zeeman_hamiltonian(sys) + j_hamiltonian(sys) + rf_hamiltonian(sys, wx, wy);
}

// H_c = (omega_rf - omega0) sigma_z - wx sigma_x - wy sigma_y
inline ComplexMatrix single_spin_hc(const SpinSystem& sys, double wx, double wy) {
  return (sys.omega_rf() - sys.omega0()) * pauli(SpinAxis::z) - wx * pauli(SpinAxis::x) -
         wy * pauli(SpinAxis::y);
}

// H_d = -omega0 sigma_z - wx sigma_x - wy sigma_y
inline ComplexMatrix single_spin_hd(const SpinSystem& sys, double wx, double wy) {
  return -sys.omega0() * pauli(SpinAxis::z) - wx * pauli(SpinAxis::x) - wy * pauli(SpinAxis::y);
}

// Generator of spin k alone once J is dropped: H_c - delta_k H_d.
inline ComplexMatrix single_spin_hamiltonian(const SpinSystem& sys, int k, double wx, double wy) {
  return single_spin_hc(sys, wx, wy) - sys.shift(k) * single_spin_hd(sys, wx, wy);
}

// One-spin system that evolves exactly like spin k of `sys` with J dropped.
inline SpinSystem isolated_spin(const SpinSystem& sys, int k) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(1, 1);
  return SpinSystem(sys.omega0(), {sys.shift(k)}, j, sys.omega_rf(), sys.control_bound());
}

}  // namespace spinforge
