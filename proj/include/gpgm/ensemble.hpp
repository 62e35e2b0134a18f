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
#include <random>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "gpgm/gaussian_state.hpp"
#include "gpgm/symplectic.hpp"
#include "gpgm/types.hpp"

namespace gpgm {

/// ρ_x = D(−Lx) ρ₀ D(Lx) with x ~ N(μ, Σ).
class GaussianEnsemble {
 public:
  GaussianEnsemble(GaussianState rho0, Matrix L, Vector mu, Matrix Sigma)
      : rho0_(std::move(rho0)), L_(std::move(L)), mu_(std::move(mu)), Sigma_(std::move(Sigma)) {
    const Eigen::Index d = rho0_.dim();
    require_square(L_, d, "ensemble L");
    require_length(mu_, d, "ensemble mu");
    require_square(Sigma_, d, "ensemble Sigma");
    rho0_.require_faithful("ensemble rho0");

    const double det_l = std::abs(L_.determinant());
    const double scale = std::pow(L_.norm(), static_cast<double>(d));
    if (!(det_l > 1e-12 * scale)) {
      std::ostringstream os;
      os << "ensemble: displacement map L is singular (|det L| = " << det_l << ")";
      throw PreconditionError(os.str(), det_l);
    }
    if (!is_symmetric(Sigma_, kSymmetryTolerance)) throw PreconditionError("ensemble: Sigma is not symmetric");
    Sigma_ = symmetrize(Sigma_);
    Eigen::LLT<Matrix> chol(Sigma_);
    if (chol.info() != Eigen::Success || !(min_sym_eigenvalue(Sigma_) > 0.0)) {
      throw PreconditionError("ensemble: Sigma is not positive definite", min_sym_eigenvalue(Sigma_));
    }
    sigma_l_ = chol.matrixL();
  }

  int modes() const { return rho0_.modes(); }
  Eigen::Index dim() const { return rho0_.dim(); }
  const GaussianState& rho0() const { return rho0_; }
  const Matrix& L() const { return L_; }
  const Vector& mu() const { return mu_; }
  const Matrix& Sigma() const { return Sigma_; }
  /// Lower-triangular factor of Σ.
  const Matrix& sigma_factor() const { return sigma_l_; }

 private:
  GaussianState rho0_;
  Matrix L_;
  Vector mu_;
  Matrix Sigma_;
  Matrix sigma_l_;
};

inline GaussianState state_at(const GaussianEnsemble& e, const Vector& x) {
  require_length(x, e.dim(), "state_at");
  return GaussianState(e.rho0().mean() + e.L() * x, e.rho0().cov());
}

inline double prior_density(const GaussianEnsemble& e, const Vector& x) {
  require_length(x, e.dim(), "prior_density");
  return normal_density(x, e.mu(), e.Sigma());
}

/// ρ = ∫ p(x) ρ_x dx: mean r₀ + Lμ, covariance V₀ + 2LΣLᵀ.
inline GaussianState average_state(const GaussianEnsemble& e) {
  return GaussianState(e.rho0().mean() + e.L() * e.mu(),
                       symmetrize(e.rho0().cov() + 2.0 * e.L() * e.Sigma() * e.L().transpose()));
}

/// Standard normal vector of length `dim`.
template <typename Rng>
Vector standard_normal(Rng& rng, Eigen::Index dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector z(dim);
  for (Eigen::Index i = 0; i < dim; ++i) z(i) = g(rng);
  return z;
}

template <typename Rng>
Vector sample_prior(const GaussianEnsemble& e, Rng& rng) {
  return e.mu() + e.sigma_factor() * standard_normal(rng, e.dim());
}

}  // namespace gpgm
