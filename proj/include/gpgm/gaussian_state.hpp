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

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "gpgm/symplectic.hpp"
#include "gpgm/types.hpp"

namespace gpgm {

/// Mean r and covariance V (anticommutator convention, vacuum V = I).
class GaussianState {
 public:
  GaussianState() = default;

  GaussianState(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
    const int n = modes_of(cov_);
    require_length(mean_, 2 * n, "GaussianState mean");
    if (!mean_.allFinite() || !cov_.allFinite()) throw PreconditionError("GaussianState: non-finite entries");
    if (!is_symmetric(cov_, kSymmetryTolerance)) {
      throw PreconditionError("GaussianState: covariance matrix is not symmetric");
    }
    cov_ = symmetrize(cov_);
  }

  /// Zero-mean state with covariance `cov`.
  static GaussianState centered(Matrix cov) {
    Vector r = Vector::Zero(cov.rows());
    return GaussianState(std::move(r), std::move(cov));
  }

  int modes() const { return static_cast<int>(cov_.rows() / 2); }
  Eigen::Index dim() const { return cov_.rows(); }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }

  UncertaintyCheck physicality(double tol = kFaithfulTolerance) const { return check_uncertainty(cov_, tol); }
  bool faithful(double tol = kFaithfulTolerance) const {
    return physicality(tol).status == Physicality::faithful;
  }
  void require_faithful(const std::string& what) const { gpgm::require_faithful(cov_, what); }

 private:
  Vector mean_;
  Matrix cov_;
};

/// D(−d) ρ D(d): mean r + d, covariance unchanged.
inline GaussianState displace(const GaussianState& s, const Vector& d) {
  require_length(d, s.dim(), "displace");
  return GaussianState(s.mean() + d, s.cov());
}

/// Z = √det((V + iΩ)/2) = ∏ √(ν_j² − 1)/2.
inline double normalization_z(const GaussianState& s) {
  s.require_faithful("normalization_z");
  double z = 1.0;
  for (double nu : symplectic_spectrum(s.cov())) z *= 0.5 * std::sqrt(nu * nu - 1.0);
  return z;
}

/// Tr[ρ_a ρ_b].
inline double overlap(const GaussianState& a, const GaussianState& b) {
  if (a.dim() != b.dim()) throw DimensionError("overlap: mode counts differ");
  const Matrix m = 0.5 * (a.cov() + b.cov());
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw PreconditionError("overlap: (V_a + V_b)/2 is not positive definite");
  const Vector d = a.mean() - b.mean();
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return std::exp(-0.5 * log_det - 0.5 * d.dot(llt.solve(d)));
}

inline double purity(const GaussianState& s) { return overlap(s, s); }

/// ∫ dz q(z) D(−z) ρ D(z) for z ~ N(m, C).
inline GaussianState classical_mix(const GaussianState& s, const Vector& m, const Matrix& c) {
  require_length(m, s.dim(), "classical_mix mean");
  require_square(c, s.dim(), "classical_mix covariance");
  if (!is_symmetric(c, kSymmetryTolerance) || Eigen::LLT<Matrix>(symmetrize(c)).info() != Eigen::Success) {
    throw PreconditionError("classical_mix: density covariance is not symmetric positive definite",
                            min_sym_eigenvalue(c));
  }
  return GaussianState(s.mean() + m, s.cov() + 2.0 * symmetrize(c));
}

/// log N(x; m, C).
inline double log_normal_density(const Vector& x, const Vector& m, const Matrix& c) {
  Eigen::LLT<Matrix> llt(c);
  if (llt.info() != Eigen::Success) throw PreconditionError("normal density: covariance is not positive definite");
  const Vector d = x - m;
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double k = static_cast<double>(x.size());
  return -0.5 * (k * std::log(2.0 * kPi) + log_det + d.dot(llt.solve(d)));
}

inline double normal_density(const Vector& x, const Vector& m, const Matrix& c) {
  return std::exp(log_normal_density(x, m, c));
}

}  // namespace gpgm
