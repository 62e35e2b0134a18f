// Copyright 2026 The gaussian-pgm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Symplectic linear algebra for n-mode covariance matrices in the
// (x1, p1, ..., xn, pn) ordering with Ω = I_n ⊗ [[0, 1], [-1, 0]].
//
// Every matrix function of VΩ used in this library (square roots, arcoth,
// the Hamiltonian map) is evaluated in the Williamson basis V = SᵀDS, where
// (DΩ)² = -D² and each function reduces to a scalar function of ν_j.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gpgm/types.hpp"

namespace gpgm {

inline constexpr double kFaithfulTolerance = 1e-9;
inline constexpr double kSymmetryTolerance = 1e-10;

struct SymplecticForm {
  int modes = 0;
  Matrix matrix;
};

/// Ω for `modes` modes.
inline SymplecticForm omega(int modes) {
  if (modes < 1) throw PreconditionError("omega: mode count must be positive");
  Matrix m = Matrix::Zero(2 * modes, 2 * modes);
  for (int j = 0; j < modes; ++j) {
    m(2 * j, 2 * j + 1) = 1.0;
    m(2 * j + 1, 2 * j) = -1.0;
  }
  return {modes, std::move(m)};
}

inline Matrix omega_matrix(Eigen::Index dim) { return omega(static_cast<int>(dim / 2)).matrix; }

inline int modes_of(const Matrix& v) {
  if (v.rows() != v.cols() || v.rows() == 0 || v.rows() % 2 != 0) {
    throw DimensionError("expected a non-empty 2n x 2n matrix, got " + std::to_string(v.rows()) +
                         "x" + std::to_string(v.cols()));
  }
  return static_cast<int>(v.rows() / 2);
}

/// V = Sᵀ D S with S symplectic and D = diag(ν) ⊗ I₂, ν sorted descending.
struct WilliamsonDecomposition {
  Matrix S;
  Vector nu;
  Matrix D;

  Matrix S_inverse() const { return S.partialPivLu().inverse(); }
};

/// Symmetric square root of an SPD matrix.
inline Matrix spd_sqrt(const Matrix& v) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(v);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

inline void require_spd(const Matrix& v, const char* what) {
  if (!is_symmetric(v, kSymmetryTolerance)) {
    std::ostringstream os;
    os << what << ": matrix is not symmetric (asymmetry " << (v - v.transpose()).norm() << ")";
    throw PreconditionError(os.str());
  }
  const double lo = min_sym_eigenvalue(v);
  if (!(lo > 0.0)) {
    std::ostringstream os;
    os << what << ": matrix is not positive definite (smallest eigenvalue " << lo << ")";
    throw PreconditionError(os.str(), lo);
  }
}

/// Williamson normal form of a symmetric positive-definite V.
///
/// The symplectic spectrum is read from the real Schur form of the
/// antisymmetric matrix A = V^{1/2} Ω V^{1/2} = O (ΩD) Oᵀ; then
/// S = D^{-1/2} Oᵀ V^{1/2}.
inline WilliamsonDecomposition williamson(const Matrix& v) {
  const int n = modes_of(v);
  require_spd(v, "williamson");
  const Matrix vs = symmetrize(v);
  const Matrix root = spd_sqrt(vs);
  const Matrix om = omega(n).matrix;
  Matrix a = root * om * root;
  a = 0.5 * (a - a.transpose());

  Eigen::RealSchur<Matrix> schur(a);
  if (schur.info() != Eigen::Success) throw ConsistencyError("williamson: Schur iteration failed");
  Matrix o = schur.matrixU();

  // OᵀAO is antisymmetric and block diagonal; orient each block as [[0, ν], [-ν, 0]].
  Matrix k = o.transpose() * a * o;
  std::vector<double> nus(n);
  for (int j = 0; j < n; ++j) {
    const int i = 2 * j;
    double b = 0.5 * (k(i, i + 1) - k(i + 1, i));
    if (b < 0.0) {
      o.col(i).swap(o.col(i + 1));
      b = -b;
    }
    nus[j] = b;
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int l, int r) { return nus[l] > nus[r]; });

  Matrix sorted_o(2 * n, 2 * n);
  WilliamsonDecomposition w;
  w.nu.resize(n);
  for (int j = 0; j < n; ++j) {
    sorted_o.col(2 * j) = o.col(2 * order[j]);
    sorted_o.col(2 * j + 1) = o.col(2 * order[j] + 1);
    w.nu(j) = nus[order[j]];
  }
  if (!(w.nu.minCoeff() > 0.0)) throw ConsistencyError("williamson: non-positive symplectic eigenvalue");

  Vector d(2 * n), d_inv_sqrt(2 * n);
  for (int j = 0; j < n; ++j) {
    d(2 * j) = d(2 * j + 1) = w.nu(j);
    d_inv_sqrt(2 * j) = d_inv_sqrt(2 * j + 1) = 1.0 / std::sqrt(w.nu(j));
  }
  w.D = d.asDiagonal();
  w.S = d_inv_sqrt.asDiagonal() * sorted_o.transpose() * root;
  return w;
}

inline Vector symplectic_spectrum(const Matrix& v) { return williamson(v).nu; }

enum class Physicality { faithful, boundary, invalid };

struct UncertaintyCheck {
  Physicality status;
  /// min_j ν_j − 1.
  double margin;
};

inline const char* to_string(Physicality p) {
  switch (p) {
    case Physicality::faithful: return "faithful";
    case Physicality::boundary: return "boundary";
    case Physicality::invalid: return "invalid";
  }
  return "?";
}

/// Classifies V by its smallest symplectic eigenvalue against 1.
inline UncertaintyCheck check_uncertainty(const Matrix& v, double tol = kFaithfulTolerance) {
  modes_of(v);
  if (!is_symmetric(v, kSymmetryTolerance)) return {Physicality::invalid, -1.0};
  const double lo = min_sym_eigenvalue(v);
  if (!(lo > 0.0)) return {Physicality::invalid, lo - 1.0};
  const double margin = symplectic_spectrum(v).minCoeff() - 1.0;
  if (margin > tol) return {Physicality::faithful, margin};
  if (margin >= -tol) return {Physicality::boundary, margin};
  return {Physicality::invalid, margin};
}

inline void require_faithful(const Matrix& v, const std::string& what,
                             double tol = kFaithfulTolerance) {
  const UncertaintyCheck c = check_uncertainty(v, tol);
  if (c.status != Physicality::faithful) {
    std::ostringstream os;
    os << what << ": uncertainty principle violated or state not faithful (min symplectic "
       << "eigenvalue - 1 = " << c.margin << ", status " << to_string(c.status) << ")";
    throw NotFaithfulError(os.str(), c.margin);
  }
}

namespace detail {

template <typename F>
Matrix williamson_function(const WilliamsonDecomposition& w, F&& f) {
  const Eigen::Index n = w.nu.size();
  Vector d(2 * n);
  for (Eigen::Index j = 0; j < n; ++j) d(2 * j) = d(2 * j + 1) = f(w.nu(j));
  return d.asDiagonal() * Matrix::Identity(2 * n, 2 * n);
}

inline const WilliamsonDecomposition& require_faithful_spectrum(const WilliamsonDecomposition& w,
                                                                 const char* what) {
  const double margin = w.nu.minCoeff() - 1.0;
  if (!(margin > kFaithfulTolerance)) {
    std::ostringstream os;
    os << what << ": non-faithful state (min symplectic eigenvalue - 1 = " << margin << ")";
    throw NotFaithfulError(os.str(), margin);
  }
  return w;
}

}  // namespace detail

/// √(I + (VΩ)^{-2}) = Sᵀ √(I − D^{-2}) S^{-T}; real with spectrum in (0, 1).
///
/// Its transpose is √(I + (ΩV)^{-2}).
inline Matrix sqrt_factor(const Matrix& v) {
  const auto w = williamson(v);
  detail::require_faithful_spectrum(w, "sqrt_factor");
  const Matrix f = detail::williamson_function(w, [](double nu) { return std::sqrt(1.0 - 1.0 / (nu * nu)); });
  return w.S.transpose() * f * w.S_inverse().transpose();
}

/// (√(I + (VΩ)^{-2}))^{-1}.
inline Matrix inverse_sqrt_factor(const Matrix& v) {
  const auto w = williamson(v);
  detail::require_faithful_spectrum(w, "inverse_sqrt_factor");
  const Matrix f = detail::williamson_function(w, [](double nu) { return 1.0 / std::sqrt(1.0 - 1.0 / (nu * nu)); });
  return w.S.transpose() * f * w.S_inverse().transpose();
}

/// Hamiltonian matrix H = 2iΩ arcoth(V iΩ) = 2 S^{-1} arcoth(D) S^{-T}.
inline Matrix hamiltonian_from_covariance(const Matrix& v) {
  const auto w = williamson(v);
  detail::require_faithful_spectrum(w, "hamiltonian_from_covariance");
  const Matrix a = detail::williamson_function(w, [](double nu) { return std::atanh(1.0 / nu); });
  const Matrix s_inv = w.S_inverse();
  return symmetrize(2.0 * s_inv * a * s_inv.transpose());
}

/// Inverse of hamiltonian_from_covariance: V = coth(iΩH/2) iΩ.
inline Matrix covariance_from_hamiltonian(const Matrix& h) {
  // H = Tᵀ Λ T  ⇒  V = T^{-1} coth(Λ/2) T^{-T}.
  const auto w = williamson(h);
  const Matrix c = detail::williamson_function(w, [](double lambda) { return 1.0 / std::tanh(0.5 * lambda); });
  const Matrix t_inv = w.S_inverse();
  return symmetrize(t_inv * c * t_inv.transpose());
}

/// W = −V iΩ.
inline CMatrix cayley_w(const Matrix& v) {
  const Matrix om = omega_matrix(v.rows());
  return -Complex(0.0, 1.0) * (v * om).cast<Complex>();
}

/// exp[iΩH] = (W − I)(W + I)^{-1}.
inline CMatrix cayley_forward(const CMatrix& w) {
  const auto I = CMatrix::Identity(w.rows(), w.cols());
  Eigen::JacobiSVD<CMatrix> svd(w + I);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > 1e-12 * std::max(1.0, sv(0)))) throw PreconditionError("cayley_forward: W + I is singular");
  // A B^{-1} = (B^{-T} Aᵀ)ᵀ
  Eigen::PartialPivLU<CMatrix> lu((w + I).transpose());
  return lu.solve((w - I).transpose()).transpose();
}

/// W = (I + exp[iΩH])(I − exp[iΩH])^{-1}.
inline CMatrix cayley_inverse(const CMatrix& e) {
  const auto I = CMatrix::Identity(e.rows(), e.cols());
  Eigen::JacobiSVD<CMatrix> svd(I - e);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > 1e-12 * std::max(1.0, sv(0)))) {
    throw PreconditionError("cayley_inverse: I - exp[iΩH] is singular (eigenvalue 1)");
  }
  Eigen::PartialPivLU<CMatrix> lu((I - e).transpose());
  return lu.solve((I + e).transpose()).transpose();
}

/// Relative residual of V − iΩ = F V (V + iΩ)^{-1} V Fᵀ with F = √(I + (VΩ)^{-2}).
inline double conjugation_identity_residual(const Matrix& v) {
  const Matrix f = sqrt_factor(v);
  const Matrix om = omega_matrix(v.rows());
  const Complex i(0.0, 1.0);
  const CMatrix vc = v.cast<Complex>();
  const CMatrix lhs = vc - i * om.cast<Complex>();
  const CMatrix plus = vc + i * om.cast<Complex>();
  const CMatrix inner = plus.partialPivLu().solve(vc);
  const CMatrix rhs = f.cast<Complex>() * vc * inner * f.transpose().cast<Complex>();
  return (lhs - rhs).norm() / lhs.norm();
}

/// ‖SᵀΩS − Ω‖ and ‖SᵀDS − V‖/‖V‖ for a decomposition of V.
struct WilliamsonResiduals {
  double symplectic;
  double reconstruction;
};

inline WilliamsonResiduals williamson_residuals(const Matrix& v, const WilliamsonDecomposition& w) {
  const Matrix om = omega_matrix(v.rows());
  return {(w.S.transpose() * om * w.S - om).norm(),
          (w.S.transpose() * w.D * w.S - v).norm() / v.norm()};
}

}  // namespace gpgm
