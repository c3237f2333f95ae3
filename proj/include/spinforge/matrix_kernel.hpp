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

// Dense complex small-matrix primitives shared by every other module.
//
// Spin matrices follow the NMR convention with the 1/2 factor folded in:
// sigma_z = diag(1, -1) / 2, so a rotation exp(-i theta sigma_n) turns a
// Bloch vector by theta about n.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>

#include <Eigen/Dense>

#include "spinforge/error.hpp"

namespace spinforge {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Fixed tolerances; not configurable.
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kDeterminantTol = 1e-8;
inline constexpr double kUnitaryTol = 1e-8;
inline constexpr double kRoundTripTol = 1e-9;

enum class SpinAxis { x, y, z };

inline const char* axis_name(SpinAxis axis) {
  switch (axis) {
    case SpinAxis::x: return "x";
    case SpinAxis::y: return "y";
    case SpinAxis::z: return "z";
  }
  return "?";
}

inline ComplexMatrix identity(Eigen::Index dim) {
  return ComplexMatrix::Identity(dim, dim);
}

inline ComplexMatrix pauli(SpinAxis axis) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  switch (axis) {
    case SpinAxis::x:
      m(0, 1) = 0.5;
      m(1, 0) = 0.5;
      break;
    case SpinAxis::y:
      m(0, 1) = -0.5 * kI;
      m(1, 0) = 0.5 * kI;
      break;
    case SpinAxis::z:
      m(0, 0) = 0.5;
      m(1, 1) = -0.5;
      break;
  }
  return m;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline double frobenius_norm(const ComplexMatrix& a) { return a.norm(); }

// Largest entrywise |h - h^dagger|.
inline double hermiticity_deviation(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) return INFINITY;
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

inline double unitarity_deviation(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) return INFINITY;
  return (u.adjoint() * u - identity(u.rows())).norm();
}

inline void require_square(const ComplexMatrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw ModelError(std::string(what) + ": matrix must be square and non-empty");
  }
  if (!a.allFinite()) {
    throw ModelError(std::string(what) + ": matrix has non-finite entries");
  }
}

// Eigendecomposition h = V diag(lambda) V^dagger of a Hermitian generator,
// kept around so exp(-i t h) and its parameter derivatives share one solve.
struct HermitianEigen {
  Eigen::VectorXd values;
  ComplexMatrix vectors;

  explicit HermitianEigen(const ComplexMatrix& h) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
    values = solver.eigenvalues();
    vectors = solver.eigenvectors();
  }

  ComplexVector phases(double t) const {
    ComplexVector p(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      p(i) = std::polar(1.0, -t * values(i));
    }
    return p;
  }

  ComplexMatrix exp_minus_i(double t) const {
    return vectors * phases(t).asDiagonal() * vectors.adjoint();
  }
};

// exp(-i t h) for Hermitian h.
inline ComplexMatrix expm_skew(const ComplexMatrix& h, double t) {
  require_square(h, "expm_skew");
  if (hermiticity_deviation(h) > kHermitianTol) {
    throw ModelError("expm_skew: generator is not Hermitian");
  }
  if (t == 0.0) return identity(h.rows());
  return HermitianEigen(h).exp_minus_i(t);
}

// Principal skew-Hermitian logarithm of an SU(2) element.
//
// Writes u = cos(phi) I - i sin(phi) n.tau (tau the full Pauli matrices,
// phi in [0, pi]) and returns -i phi n.tau. For u = -I the axis is z.
inline ComplexMatrix logm_su2(const ComplexMatrix& u) {
  if (u.rows() != 2 || u.cols() != 2) {
    throw ModelError("logm_su2: expected a 2x2 matrix");
  }
  if (!u.allFinite() || unitarity_deviation(u) > kUnitaryTol) {
    throw ModelError("logm_su2: matrix is not unitary");
  }
  if (std::abs(u.determinant() - 1.0) > kDeterminantTol) {
    throw ModelError("logm_su2: determinant is not 1");
  }
  const double c = 0.5 * (u(0, 0) + u(1, 1)).real();
  Eigen::Vector3d v;
  v(0) = -0.5 * (u(0, 1) + u(1, 0)).imag();
  v(1) = 0.5 * (u(1, 0) - u(0, 1)).real();
  v(2) = -0.5 * (u(0, 0) - u(1, 1)).imag();
  const double s = v.norm();

  Eigen::Vector3d axis(0.0, 0.0, 1.0);
  double phi = 0.0;
  if (s > 1e-14) {
    axis = v / s;
    phi = std::atan2(s, c);
  } else if (c < 0.0) {
    phi = kPi;
  } else {
    return ComplexMatrix::Zero(2, 2);
  }
  // -i phi n.tau = -2 i phi n.sigma
  ComplexMatrix gen = axis(0) * pauli(SpinAxis::x) + axis(1) * pauli(SpinAxis::y) +
                      axis(2) * pauli(SpinAxis::z);
  return (-2.0 * phi * kI) * gen;
}

// exp of a 2x2 skew-Hermitian matrix, used to check logm_su2 round trips.
inline ComplexMatrix expm_skew_hermitian_generator(const ComplexMatrix& x) {
  // x = -i h with h Hermitian.
  ComplexMatrix h = kI * x;
  h = 0.5 * (h + h.adjoint()).eval();
  return expm_skew(h, 1.0);
}

// 2^-N Re Tr(u^dagger v). Phase sensitive.
inline double trace_fidelity(const ComplexMatrix& u, const ComplexMatrix& v, int n_spins) {
  const Eigen::Index dim = Eigen::Index{1} << n_spins;
  if (u.rows() != dim || u.cols() != dim || v.rows() != dim || v.cols() != dim) {
    throw ModelError("trace_fidelity: dimension mismatch");
  }
  // Tr(u^dagger v) = sum_ij conj(u_ij) v_ij
  return u.cwiseProduct(v.conjugate()).sum().real() / static_cast<double>(dim);
}

}  // namespace spinforge
