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

// Inhomogeneous quadratic exponents Ĥ = (i/2) r̂ᵀΩX r̂ + i sᵀΩ r̂ + (i/2) a and
// their (2n+2)-dimensional matrix representation
//
//   M = [[0, sᵀΩᵀ, a], [0, X, s], [0, 0, 0]].
//
// Products of operator exponentials map to products of exp(M), so composing
// exponents reduces to small dense linear algebra.

#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "gpgm/gaussian_state.hpp"
#include "gpgm/symplectic.hpp"
#include "gpgm/types.hpp"

namespace gpgm {

inline constexpr double kExponentSymmetryTolerance = 1e-9;
inline constexpr double kSeriesThreshold = 1e-4;
inline constexpr int kSeriesTerms = 12;

struct QuadraticExponent {
  CMatrix X;
  CVector s;
  Complex a{0.0, 0.0};

  static QuadraticExponent zero(int modes) {
    return {CMatrix::Zero(2 * modes, 2 * modes), CVector::Zero(2 * modes), Complex(0.0, 0.0)};
  }

  Eigen::Index dim() const { return X.rows(); }
  int modes() const { return static_cast<int>(X.rows() / 2); }

  QuadraticExponent operator-() const { return {-X, -s, -a}; }
};

namespace detail {

inline CMatrix complex_omega(Eigen::Index dim) { return omega_matrix(dim).cast<Complex>(); }

inline void validate(const QuadraticExponent& q) {
  const Eigen::Index d = q.X.rows();
  if (d == 0 || d % 2 != 0 || q.X.cols() != d || q.s.size() != d) {
    throw DimensionError("QuadraticExponent: inconsistent block sizes");
  }
  const CMatrix ox = complex_omega(d) * q.X;
  const double asym = (ox - ox.transpose()).norm();
  if (asym > kExponentSymmetryTolerance * std::max(1.0, q.X.norm())) {
    std::ostringstream os;
    os << "QuadraticExponent: ΩX is not symmetric (asymmetry " << asym << ")";
    throw PreconditionError(os.str(), asym);
  }
}

// φ₁(λ) = (e^λ − 1)/λ and φ₂(λ) = (e^λ − 1 − λ)/λ², entire functions.
inline Complex phi1(Complex z) {
  if (std::abs(z) < 0.5) {
    Complex term(1.0, 0.0), sum(0.0, 0.0);
    for (int k = 1; k <= 25; ++k) {
      term /= static_cast<double>(k);
      sum += term;
      term *= z;
    }
    return sum;
  }
  return (std::exp(z) - 1.0) / z;
}

inline Complex phi2(Complex z) {
  if (std::abs(z) < 0.5) {
    Complex term(0.5, 0.0), sum(0.0, 0.0);
    for (int k = 2; k <= 27; ++k) {
      sum += term;
      term *= z / static_cast<double>(k + 1);
    }
    return sum;
  }
  return (std::exp(z) - 1.0 - z) / (z * z);
}

struct PhiBlocks {
  CMatrix expX;
  CMatrix phi1;
  CMatrix phi2;
};

inline PhiBlocks phi_blocks(const CMatrix& x) {
  const Eigen::Index d = x.rows();
  const CMatrix I = CMatrix::Identity(d, d);
  if (x.norm() < kSeriesThreshold) {
    // e^X = Σ X^k/k!, φ₁ = Σ X^k/(k+1)!, φ₂ = Σ X^k/(k+2)!
    PhiBlocks b{CMatrix::Zero(d, d), CMatrix::Zero(d, d), CMatrix::Zero(d, d)};
    CMatrix power = I;
    double fact = 1.0;
    for (int k = 0; k < kSeriesTerms; ++k) {
      b.expX += power / fact;
      b.phi1 += power / (fact * (k + 1));
      b.phi2 += power / (fact * (k + 1) * (k + 2));
      power = power * x;
      fact *= (k + 1);
    }
    return b;
  }
  Eigen::ComplexEigenSolver<CMatrix> es(x);
  const CMatrix& p = es.eigenvectors();
  Eigen::PartialPivLU<CMatrix> lu(p);
  const CMatrix p_inv = lu.inverse();
  const double cond = p.norm() * p_inv.norm();
  if (es.info() == Eigen::Success && std::isfinite(cond) && cond < 1e8) {
    CVector e(d), f1(d), f2(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      const Complex l = es.eigenvalues()(j);
      e(j) = std::exp(l);
      f1(j) = phi1(l);
      f2(j) = phi2(l);
    }
    return {p * e.asDiagonal() * p_inv, p * f1.asDiagonal() * p_inv, p * f2.asDiagonal() * p_inv};
  }
  // Defective X: read φ₁, φ₂ off exp([[X, I, 0], [0, 0, I], [0, 0, 0]]).
  CMatrix big = CMatrix::Zero(3 * d, 3 * d);
  big.block(0, 0, d, d) = x;
  big.block(0, d, d, d) = I;
  big.block(d, 2 * d, d, d) = I;
  const CMatrix e = big.exp();
  return {e.block(0, 0, d, d), e.block(0, d, d, d), e.block(0, 2 * d, d, d)};
}

}  // namespace detail

inline CMatrix embed(const QuadraticExponent& q) {
  detail::validate(q);
  const Eigen::Index d = q.dim();
  const CMatrix om = detail::complex_omega(d);
  CMatrix m = CMatrix::Zero(d + 2, d + 2);
  m.block(0, 1, 1, d) = q.s.transpose() * om.transpose();
  m(0, d + 1) = q.a;
  m.block(1, 1, d, d) = q.X;
  m.block(1, d + 1, d, 1) = q.s;
  return m;
}

inline QuadraticExponent extract(const CMatrix& m) {
  const Eigen::Index d = m.rows() - 2;
  if (d <= 0 || d % 2 != 0 || m.cols() != m.rows()) throw DimensionError("extract: bad embedded matrix size");
  QuadraticExponent q{m.block(1, 1, d, d), m.block(1, d + 1, d, 1), m(0, d + 1)};
  detail::validate(q);
  return q;
}

/// exp(embed(q)) in closed form:
///   [[1, sᵀΩᵀφ₁(X), a + sᵀΩᵀφ₂(X)s], [0, e^X, φ₁(X)s], [0, 0, 1]].
inline CMatrix exp_embedded(const QuadraticExponent& q) {
  detail::validate(q);
  const Eigen::Index d = q.dim();
  const auto b = detail::phi_blocks(q.X);
  const CVector u = detail::complex_omega(d) * q.s;  // (sᵀΩᵀ)ᵀ
  CMatrix e = CMatrix::Identity(d + 2, d + 2);
  e.block(0, 1, 1, d) = u.transpose() * b.phi1;
  e(0, d + 1) = q.a + (u.transpose() * b.phi2 * q.s)(0, 0);
  e.block(1, 1, d, d) = b.expX;
  e.block(1, d + 1, d, 1) = b.phi1 * q.s;
  return e;
}

/// Recovers the exponent whose exp_embedded equals `product`, taking the
/// principal logarithm of the middle block.
inline QuadraticExponent log_embedded(const CMatrix& product) {
  const Eigen::Index d = product.rows() - 2;
  if (d <= 0 || d % 2 != 0) throw DimensionError("log_embedded: bad matrix size");
  const CMatrix e = product.block(1, 1, d, d);

  Eigen::ComplexEigenSolver<CMatrix> es(e, false);
  const double scale = std::max(1.0, e.norm());
  for (Eigen::Index j = 0; j < d; ++j) {
    const Complex l = es.eigenvalues()(j);
    if (l.real() <= 0.0 && std::abs(l.imag()) <= 1e-12 * scale) {
      std::ostringstream os;
      os << "compose: product has eigenvalue " << l << " on the closed negative real axis; principal log undefined";
      throw BranchError(os.str());
    }
  }
  QuadraticExponent q;
  q.X = e.log();
  const auto b = detail::phi_blocks(q.X);
  Eigen::PartialPivLU<CMatrix> lu(b.phi1);
  Eigen::JacobiSVD<CMatrix> svd(b.phi1);
  const auto& sv = svd.singularValues();
  if (!(sv(d - 1) > 1e-12 * sv(0))) throw ConsistencyError("compose: degenerate composition (φ₁(X₃) singular)");
  q.s = lu.solve(product.block(1, d + 1, d, 1));
  const CVector u = detail::complex_omega(d) * q.s;
  q.a = product(0, d + 1) - (u.transpose() * b.phi2 * q.s)(0, 0);
  return q;
}

/// q₃ with exp(M₁) exp(M₂) = exp(M₃).
inline QuadraticExponent compose(const QuadraticExponent& q1, const QuadraticExponent& q2) {
  if (q1.dim() != q2.dim()) throw DimensionError("compose: mode counts differ");
  return log_embedded(exp_embedded(q1) * exp_embedded(q2));
}

/// Left-to-right product of several exponentials, taking one logarithm at the end.
inline QuadraticExponent compose_all(const std::vector<QuadraticExponent>& qs) {
  if (qs.empty()) throw PreconditionError("compose_all: empty product");
  CMatrix p = exp_embedded(qs.front());
  for (std::size_t k = 1; k < qs.size(); ++k) {
    if (qs[k].dim() != qs.front().dim()) throw DimensionError("compose_all: mode counts differ");
    p = p * exp_embedded(qs[k]);
  }
  return log_embedded(p);
}

/// Exponent of t·½(r̂ − r)ᵀH(r̂ − r): X = itΩH, s = itΩHr, a = −it rᵀHr.
inline QuadraticExponent gaussian_exponent(const GaussianState& state, double t) {
  state.require_faithful("gaussian_exponent");
  const Matrix h = hamiltonian_from_covariance(state.cov());
  const Matrix om = omega_matrix(state.dim());
  const Complex it(0.0, t);
  QuadraticExponent q;
  q.X = it * (om * h).cast<Complex>();
  q.s = it * (om * h * state.mean()).cast<Complex>();
  q.a = -it * state.mean().dot(h * state.mean());
  return q;
}

/// Reads (V, r) back off an exponent of the form −½(r̂ − r)ᵀH(r̂ − r), i.e.
/// X = −iΩH and s = −iΩHr, up to the scalar a.
inline GaussianState state_from_exponent(const QuadraticExponent& q, double imag_tol = 1e-8) {
  detail::validate(q);
  const Eigen::Index d = q.dim();
  const CMatrix om = detail::complex_omega(d);
  // X = −iΩH ⇒ H = iΩᵀX
  const CMatrix hc = Complex(0.0, 1.0) * om.transpose() * q.X;
  const CVector hr = Complex(0.0, 1.0) * om.transpose() * q.s;
  const double scale = std::max(1.0, hc.norm());
  if (hc.imag().norm() > imag_tol * scale || hr.imag().norm() > imag_tol * std::max(1.0, hr.norm())) {
    throw ConsistencyError("state_from_exponent: exponent is not of real Gaussian form");
  }
  const Matrix h = symmetrize(hc.real());
  const Vector r = h.partialPivLu().solve(hr.real());
  return GaussianState(r, covariance_from_hamiltonian(h));
}

/// Residual of exp(M₁)exp(M₂) against exp(M₃), relative to the product norm.
inline double composition_residual(const QuadraticExponent& q1, const QuadraticExponent& q2,
                                   const QuadraticExponent& q3) {
  const CMatrix p = exp_embedded(q1) * exp_embedded(q2);
  return (p - exp_embedded(q3)).norm() / p.norm();
}

}  // namespace gpgm
