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

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace gpgm {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

/// Operand shapes disagree (mode counts, vector lengths).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented precondition (non-SPD prior, singular L, ...).
class PreconditionError : public Error {
 public:
  PreconditionError(const std::string& message, double margin)
      : Error(message), margin_(margin) {}
  explicit PreconditionError(const std::string& message)
      : PreconditionError(message, 0.0) {}

  /// Offending eigenvalue or margin, when one applies.
  double margin() const { return margin_; }

 private:
  double margin_;
};

/// Covariance matrix fails the strict uncertainty principle V + iΩ > 0.
class NotFaithfulError : public PreconditionError {
 public:
  NotFaithfulError(const std::string& message, double margin)
      : PreconditionError(message, margin) {}
};

/// A quantity guaranteed by theory came out numerically inconsistent.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Principal matrix logarithm undefined for a composed exponent.
class BranchError : public Error {
 public:
  using Error::Error;
};

/// The truncated Fock space is too small for the requested state.
class CutoffError : public Error {
 public:
  CutoffError(const std::string& message, int suggested_cutoff)
      : Error(message), suggested_(suggested_cutoff) {}

  int suggested_cutoff() const { return suggested_; }

 private:
  int suggested_;
};

inline Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

inline CMatrix hermitize(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

inline void require_square(const Matrix& a, Eigen::Index dim, const char* what) {
  if (a.rows() != dim || a.cols() != dim) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(dim) + "x" +
                         std::to_string(dim) + " matrix, got " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()));
  }
}

inline void require_length(const Vector& v, Eigen::Index dim, const char* what) {
  if (v.size() != dim) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(dim) +
                         ", got " + std::to_string(v.size()));
  }
}

/// Smallest eigenvalue of the symmetric part of `a`.
inline double min_sym_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Largest eigenvalue of the symmetric part of `a`.
inline double max_sym_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

inline bool is_symmetric(const Matrix& a, double tol) {
  const double scale = std::max(1.0, a.norm());
  return (a - a.transpose()).norm() <= tol * scale;
}

}  // namespace gpgm
