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

// Simulated quantum process tomography for two spins.
//
// The operator basis is the fixed list E_1 .. E_16 of products
// {I, sigma_x, -i sigma_y, sigma_z} (x) {same}, where the two -i factors
// combine into -1 for sigma_y (x) sigma_y, so every element is real. The
// elements are orthogonal with Tr(E_m^dagger E_n) = c_m delta_mn. The
// process matrix chi refers to the rescaled elements e_m = (2 / sqrt(c_m)) E_m
// (Tr(e_m^dagger e_m) = 4), so that
//   rho -> sum_mn chi_mn e_m rho e_n^dagger,   sum_mn chi_mn e_n^dagger e_m = I,
// and a unitary process has Tr(chi chi^dagger) = 1.

#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "spinforge/error.hpp"
#include "spinforge/matrix_kernel.hpp"

namespace spinforge {

inline constexpr int kQptDim = 4;
inline constexpr int kQptBasisSize = 16;

class OperatorBasis {
 public:
  OperatorBasis() {
    // pauli() already carries the factor 1/2.
    const std::array<ComplexMatrix, 4> single{identity(2), pauli(SpinAxis::x), -kI * pauli(SpinAxis::y),
                                              pauli(SpinAxis::z)};
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        const ComplexMatrix e = kron(single[a], single[b]);
        elements_.push_back(e);
        norms_.push_back((e.adjoint() * e).trace().real());
        scaled_.push_back(e * (2.0 / std::sqrt(norms_.back())));
      }
    }
  }

  static const OperatorBasis& instance() {
    static const OperatorBasis basis;
    return basis;
  }

  // 1-based, matching the usual 1..16 labels.
  const ComplexMatrix& element(int m) const { return elements_.at(static_cast<std::size_t>(m - 1)); }
  const ComplexMatrix& scaled(int m) const { return scaled_.at(static_cast<std::size_t>(m - 1)); }
  // Tr(E_m^dagger E_m).
  double norm(int m) const { return norms_.at(static_cast<std::size_t>(m - 1)); }

 private:
  std::vector<ComplexMatrix> elements_;
  std::vector<ComplexMatrix> scaled_;
  std::vector<double> norms_;
};

struct ProcessMatrix {
  ComplexMatrix chi = ComplexMatrix::Zero(kQptBasisSize, kQptBasisSize);

  // Applies rho -> sum chi_mn e_m rho e_n^dagger.
  ComplexMatrix apply(const ComplexMatrix& rho) const {
    const auto& basis = OperatorBasis::instance();
    ComplexMatrix out = ComplexMatrix::Zero(kQptDim, kQptDim);
    for (int m = 1; m <= kQptBasisSize; ++m) {
      for (int n = 1; n <= kQptBasisSize; ++n) {
        const Complex c = chi(m - 1, n - 1);
        if (c != Complex(0.0)) out += c * basis.scaled(m) * rho * basis.scaled(n).adjoint();
      }
    }
    return out;
  }

  // sum_mn chi_mn e_n^dagger e_m; the identity for trace-preserving maps.
  ComplexMatrix completeness() const {
    const auto& basis = OperatorBasis::instance();
    ComplexMatrix out = ComplexMatrix::Zero(kQptDim, kQptDim);
    for (int m = 1; m <= kQptBasisSize; ++m) {
      for (int n = 1; n <= kQptBasisSize; ++n) {
        out += chi(m - 1, n - 1) * basis.scaled(n).adjoint() * basis.scaled(m);
      }
    }
    return out;
  }
};

inline ProcessMatrix chi_from_unitary(const ComplexMatrix& u) {
  if (u.rows() != kQptDim || u.cols() != kQptDim) throw ModelError("chi_from_unitary: need a 4x4 matrix");
  if (unitarity_deviation(u) > kUnitaryTol) throw ModelError("chi_from_unitary: matrix is not unitary");
  const auto& basis = OperatorBasis::instance();
  ComplexVector c(kQptBasisSize);
  for (int m = 1; m <= kQptBasisSize; ++m) {
    c(m - 1) = (basis.scaled(m).adjoint() * u).trace() / static_cast<double>(kQptDim);
  }
  return {c * c.adjoint()};
}

// Images Lambda(|i><j|) of the 16 matrix units, indexed by i + 4 j.
using ActionImages = std::vector<ComplexMatrix>;

inline ComplexMatrix matrix_unit(int i, int j) {
  ComplexMatrix e = ComplexMatrix::Zero(kQptDim, kQptDim);
  e(i, j) = 1.0;
  return e;
}

inline ActionImages unitary_action(const ComplexMatrix& u) {
  ActionImages out;
  for (int j = 0; j < kQptDim; ++j) {
    for (int i = 0; i < kQptDim; ++i) out.push_back(u * matrix_unit(i, j) * u.adjoint());
  }
  return out;
}

// Linear inversion. With S = sum_k vec(Lambda(E_k)) vec(E_k)^T the
// superoperator in column-major vec form, S = sum_mn chi_mn conj(e_n) (x) e_m
// and these 256 matrices are orthogonal with squared norm 16, so
// chi_mn = Tr[(conj(e_n) (x) e_m)^dagger S] / 16.
inline ProcessMatrix chi_from_map(const ActionImages& images) {
  if (images.size() != static_cast<std::size_t>(kQptBasisSize)) {
    throw ModelError("chi_from_map: need the images of all 16 matrix units");
  }
  ComplexMatrix s(kQptBasisSize, kQptBasisSize);
  for (int k = 0; k < kQptBasisSize; ++k) {
    const ComplexMatrix& img = images[static_cast<std::size_t>(k)];
    if (img.rows() != kQptDim || img.cols() != kQptDim || !img.allFinite()) {
      throw ModelError("chi_from_map: images must be finite 4x4 matrices");
    }
    s.col(k) = Eigen::Map<const ComplexVector>(img.data(), kQptBasisSize);
  }
  const auto& basis = OperatorBasis::instance();
  ProcessMatrix p;
  for (int m = 1; m <= kQptBasisSize; ++m) {
    for (int n = 1; n <= kQptBasisSize; ++n) {
      const ComplexMatrix b = kron(basis.scaled(n).conjugate(), basis.scaled(m));
      const double gram = b.squaredNorm();
      if (!(gram > 0.0)) throw DegenerateError("chi_from_map: singular operator basis");
      p.chi(m - 1, n - 1) = b.conjugate().cwiseProduct(s).sum() / gram;
    }
  }
  return p;
}

// |Tr(a b^dagger)|.
inline double attenuated_fidelity(const ProcessMatrix& a, const ProcessMatrix& b) {
  return std::abs((a.chi * b.chi.adjoint()).trace());
}

// |Tr(a b^dagger)| / sqrt(Tr(a a^dagger) Tr(b b^dagger)); 0 if either is zero.
inline double unattenuated_fidelity(const ProcessMatrix& a, const ProcessMatrix& b) {
  const double na = a.chi.squaredNorm(), nb = b.chi.squaredNorm();
  if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
  return std::abs((a.chi * b.chi.adjoint()).trace()) / std::sqrt(na * nb);
}

}  // namespace spinforge
