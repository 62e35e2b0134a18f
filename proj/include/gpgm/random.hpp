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

// Random instance generators for property sweeps.

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "gpgm/ensemble.hpp"
#include "gpgm/gaussian_state.hpp"
#include "gpgm/pgm.hpp"
#include "gpgm/symplectic.hpp"
#include "gpgm/types.hpp"

namespace gpgm {

template <typename Rng>
Matrix gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

/// exp(ΩA) with A symmetric Gaussian of entry scale `strength`.
template <typename Rng>
Matrix random_symplectic(Rng& rng, int modes, double strength = 0.3) {
  const Matrix b = gaussian_matrix(rng, 2 * modes, 2 * modes, strength);
  const Matrix a = symmetrize(b);
  return Matrix((omega(modes).matrix * a).exp());
}

/// SᵀDS with ν_j uniform in [nu_lo, nu_hi] and S random symplectic.
template <typename Rng>
Matrix random_faithful_covariance(Rng& rng, int modes, double nu_lo = 1.05, double nu_hi = 10.0,
                                  double strength = 0.3) {
  std::uniform_real_distribution<double> u(nu_lo, nu_hi);
  Vector d(2 * modes);
  for (int j = 0; j < modes; ++j) d(2 * j) = d(2 * j + 1) = u(rng);
  const Matrix s = random_symplectic(rng, modes, strength);
  return symmetrize(s.transpose() * d.asDiagonal() * s);
}

/// Random SPD matrix with eigenvalues in [lo, hi].
template <typename Rng>
Matrix random_spd(Rng& rng, Eigen::Index dim, double lo, double hi) {
  const Matrix q = gaussian_matrix(rng, dim, dim).householderQr().householderQ();
  std::uniform_real_distribution<double> u(lo, hi);
  Vector d(dim);
  for (Eigen::Index i = 0; i < dim; ++i) d(i) = u(rng);
  return symmetrize(q * d.asDiagonal() * q.transpose());
}

template <typename Rng>
Vector random_vector(Rng& rng, Eigen::Index dim, double scale) {
  return gaussian_matrix(rng, dim, 1, scale).col(0);
}

template <typename Rng>
GaussianEnsemble random_ensemble(Rng& rng, int modes) {
  const Eigen::Index d = 2 * modes;
  Matrix l = Matrix::Identity(d, d) + gaussian_matrix(rng, d, d, 0.3);
  while (std::abs(l.determinant()) < 0.2) l = Matrix::Identity(d, d) + gaussian_matrix(rng, d, d, 0.3);
  return GaussianEnsemble(GaussianState(random_vector(rng, d, 0.5), random_faithful_covariance(rng, modes, 1.05, 4.0)),
                          l, random_vector(rng, d, 0.5), random_spd(rng, d, 0.2, 2.0));
}

/// τ with V_ρ₀ + c(V_ρ − V_ρ₀) for c ∈ [0, 0.9], so V_τ is faithful and V_τ < V_ρ.
template <typename Rng>
GaussianState random_admissible_tau(Rng& rng, const GaussianEnsemble& e) {
  std::uniform_real_distribution<double> u(0.0, 0.9);
  const Matrix gap = 2.0 * e.L() * e.Sigma() * e.L().transpose();
  return GaussianState(random_vector(rng, e.dim(), 0.5), symmetrize(e.rho0().cov() + u(rng) * gap));
}

/// One-mode ensembles whose PGM operators the Fock oracle resolves at cutoff 40:
/// mildly squeezed ρ₀ with ν₀ ∈ [1.1, 1.8], and average state with ν_ρ ≥ 2.2
/// and largest covariance eigenvalue ≤ 4.5, and seed states near μ with mean photon
/// number at most 3.5.
template <typename Rng>
GaussianEnsemble random_oracle_ensemble(Rng& rng) {
  std::uniform_real_distribution<double> nu(1.1, 1.8), scale(0.3, 1.0);
  for (;;) {
    const double nu0 = nu(rng);
    const Matrix a = gaussian_matrix(rng, 2, 1, 0.15);
    Matrix gen(2, 2);
    gen << a(0), a(1), a(1), -a(0);
    const Matrix s0 = gen.exp();
    const Matrix v0 = symmetrize(nu0 * s0.transpose() * s0);
    const Matrix l = Matrix::Identity(2, 2) + gaussian_matrix(rng, 2, 2, 0.2);
    const Matrix b = gaussian_matrix(rng, 2, 2, 0.2);
    const Matrix sigma = symmetrize(Matrix((b + b.transpose()).exp()) * scale(rng));
    const Vector mu = random_vector(rng, 2, 0.3), r0 = random_vector(rng, 2, 0.3);
    const Matrix vr = v0 + 2.0 * l * sigma * l.transpose();
    if (std::sqrt(vr.determinant()) < 2.2 || max_sym_eigenvalue(vr) > 4.5) continue;
    if (std::abs(l.determinant()) < 1e-3) continue;
    GaussianEnsemble e(GaussianState(r0, v0), l, mu, sigma);
    // Seed states at the probe points μ and μ ± 0.5eᵢ must fit the working space too.
    const PGMDescription d = pgm_description(e);
    double nbar = 0.0;
    for (int i = 0; i < 2; ++i)
      for (double step : {0.5, -0.5}) {
        Vector x = mu;
        x(i) += step;
        const GaussianState s = povm_state(d, e, x);
        nbar = std::max(nbar, 0.5 * (max_sym_eigenvalue(s.cov()) - 1.0) + 0.5 * s.mean().squaredNorm());
      }
    if (nbar > 3.5) continue;
    return e;
  }
}

}  // namespace gpgm
