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
#include <cstdint>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "gpgm/ensemble.hpp"
#include "gpgm/gaussian_state.hpp"
#include "gpgm/symplectic.hpp"
#include "gpgm/types.hpp"

namespace gpgm {

/// E_y dy = prefactor·D(−y)σD(y) dx with y = anchor + JL(x − μ).
struct PGMDescription {
  GaussianState sigma;
  Matrix J;
  Vector anchor;
  double prefactor = 0.0;
  GaussianState rho;  ///< average state
};

inline PGMDescription pgm_description(const GaussianEnsemble& e) {
  const GaussianState rho = average_state(e);
  const Matrix& vr = rho.cov();
  const Matrix f = sqrt_factor(vr);
  const Eigen::PartialPivLU<Matrix> l_lu(e.L());
  const Matrix l_inv = l_lu.inverse();
  const Matrix sigma_inv = Eigen::LLT<Matrix>(e.Sigma()).solve(Matrix::Identity(e.dim(), e.dim()));

  Matrix v_sigma = -vr + 0.5 * f * vr * l_inv.transpose() * sigma_inv * l_inv * vr * f.transpose();
  v_sigma = symmetrize(v_sigma);
  const UncertaintyCheck c = check_uncertainty(v_sigma);
  if (c.status != Physicality::faithful) {
    std::ostringstream os;
    os << "pgm_description: seed covariance V_sigma is not faithful (margin " << c.margin << ")";
    throw ConsistencyError(os.str());
  }
  const Matrix lsl = 2.0 * e.L() * e.Sigma() * e.L().transpose();
  PGMDescription d;
  d.J = f * vr * lsl.inverse();
  d.sigma = GaussianState::centered(v_sigma);
  d.anchor = rho.mean();
  d.prefactor = std::abs((d.J * e.L()).determinant()) / std::pow(2.0 * kPi, e.modes());
  d.rho = rho;
  return d;
}

/// y = r_ρ + JL(x − μ).
inline Vector outcome_from_parameter(const PGMDescription& d, const GaussianEnsemble& e, const Vector& x) {
  require_length(x, e.dim(), "outcome_from_parameter");
  return d.anchor + d.J * e.L() * (x - e.mu());
}

/// y = r_ρ + ½√(I+(V_ρΩ)^{-2}) V_ρ L^{-T}Σ^{-1}(x − μ); same map written without J.
inline Vector outcome_from_parameter_direct(const GaussianEnsemble& e, const Vector& x) {
  require_length(x, e.dim(), "outcome_from_parameter_direct");
  const GaussianState rho = average_state(e);
  const Vector w = e.L().transpose().partialPivLu().solve(Eigen::LLT<Matrix>(e.Sigma()).solve(x - e.mu()));
  return rho.mean() + 0.5 * sqrt_factor(rho.cov()) * rho.cov() * w;
}

inline Vector parameter_from_outcome(const PGMDescription& d, const GaussianEnsemble& e, const Vector& y) {
  require_length(y, e.dim(), "parameter_from_outcome");
  const Matrix jl = d.J * e.L();
  Eigen::FullPivLU<Matrix> lu(jl);
  if (!lu.isInvertible()) throw PreconditionError("parameter_from_outcome: JL is singular");
  return e.mu() + lu.solve(y - d.anchor);
}

/// POVM element at x as the Gaussian state D(−y)σD(y); multiply by d.prefactor.
inline GaussianState povm_state(const PGMDescription& d, const GaussianEnsemble& e, const Vector& x) {
  return GaussianState(outcome_from_parameter(d, e, x), d.sigma.cov());
}

/// Outcome x̃ given x: N(μ + K(x − μ), Σ̃) with K = L⁻¹J⁻¹L.
struct ConditionalOutcome {
  Vector mu;
  Matrix K;
  Matrix cov;

  Vector mean_at(const Vector& x) const { return mu + K * (x - mu); }
};

inline ConditionalOutcome conditional_outcome(const PGMDescription& d, const GaussianEnsemble& e) {
  const Matrix l_inv = e.L().partialPivLu().inverse();
  const Matrix k = l_inv * d.J.partialPivLu().inverse() * e.L();
  Matrix cov = symmetrize(e.Sigma() - k * e.Sigma() * k.transpose());
  if (Eigen::LLT<Matrix>(cov).info() != Eigen::Success || !(min_sym_eigenvalue(cov) > 0.0)) {
    std::ostringstream os;
    os << "conditional_outcome: outcome covariance is not positive definite (min eigenvalue "
       << min_sym_eigenvalue(cov) << ")";
    throw ConsistencyError(os.str());
  }
  return {e.mu(), k, cov};
}

inline ConditionalOutcome conditional_outcome(const GaussianEnsemble& e) {
  return conditional_outcome(pgm_description(e), e);
}

struct MseForms {
  double direct;   ///< 2Tr[(I − 2ΣLᵀV_ρ^{-1}F^{-1}L)Σ]
  double via_j;    ///< 2Tr[(I − L⁻¹J⁻¹L)Σ]
  double relative_difference;
};

inline MseForms mse_forms(const PGMDescription& d, const GaussianEnsemble& e) {
  const Eigen::Index n2 = e.dim();
  const Matrix I = Matrix::Identity(n2, n2);
  const Matrix& vr = d.rho.cov();
  const Matrix f_inv = inverse_sqrt_factor(vr);
  const Matrix a = I - 2.0 * e.Sigma() * e.L().transpose() * vr.partialPivLu().solve(f_inv * e.L());
  const double direct = 2.0 * (a * e.Sigma()).trace();
  const Matrix k = e.L().partialPivLu().solve(d.J.partialPivLu().solve(e.L()));
  const double via_j = 2.0 * ((I - k) * e.Sigma()).trace();
  return {direct, via_j, std::abs(direct - via_j) / std::max(std::abs(direct), 1e-300)};
}

inline constexpr double kMseFormTolerance = 1e-10;

inline double mse_closed_form(const GaussianEnsemble& e, double tol = kMseFormTolerance) {
  const MseForms m = mse_forms(pgm_description(e), e);
  if (m.relative_difference > tol) {
    std::ostringstream os;
    os << "mse_closed_form: the two closed forms disagree (relative " << m.relative_difference << ")";
    throw ConsistencyError(os.str());
  }
  return m.direct;
}

/// E‖(I − K)(x − μ)‖² + Tr Σ̃ for a given conditional model.
inline double mse_decomposition(const Matrix& Sigma, const ConditionalOutcome& c) {
  const Matrix r = Matrix::Identity(Sigma.rows(), Sigma.cols()) - c.K;
  return (r * Sigma * r.transpose()).trace() + c.cov.trace();
}

struct MonteCarloEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::int64_t trials = 0;
};

namespace detail {

struct Welford {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }

  void merge(const Welford& o) {
    if (o.n == 0) return;
    const std::int64_t total = n + o.n;
    const double delta = o.mean - mean;
    mean += delta * static_cast<double>(o.n) / static_cast<double>(total);
    m2 += o.m2 + delta * delta * static_cast<double>(n) * static_cast<double>(o.n) / static_cast<double>(total);
    n = total;
  }
};

}  // namespace detail

/// Independent stream for worker `index` of a run seeded with `seed`.
inline std::mt19937_64 worker_stream(std::uint64_t seed, unsigned index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

/// Averages ‖x − x̃‖² with x ~ N(μ, Σ) and x̃ ~ N(μ + K(x − μ), Σ̃).
///
/// Trials are split into `workers` contiguous chunks, each with its own
/// stream; partial results are merged in worker order.
inline MonteCarloEstimate mse_monte_carlo(const Vector& mu, const Matrix& Sigma, const ConditionalOutcome& c,
                                          std::int64_t trials, std::uint64_t seed, unsigned workers = 1) {
  if (trials < 1) throw PreconditionError("mse_monte_carlo: trials must be positive");
  if (workers < 1) workers = 1;
  const Eigen::Index d = mu.size();
  Eigen::LLT<Matrix> prior(Sigma), post(c.cov);
  if (prior.info() != Eigen::Success || post.info() != Eigen::Success) {
    throw PreconditionError("mse_monte_carlo: covariance not positive definite");
  }
  const Matrix lp = prior.matrixL(), lq = post.matrixL();

  std::vector<detail::Welford> parts(workers);
  auto run = [&](unsigned w) {
    const std::int64_t lo = trials * w / workers, hi = trials * (w + 1) / workers;
    std::mt19937_64 rng = worker_stream(seed, w);
    std::normal_distribution<double> g(0.0, 1.0);
    Vector z(d), x(d), xt(d);
    for (std::int64_t t = lo; t < hi; ++t) {
      for (Eigen::Index i = 0; i < d; ++i) z(i) = g(rng);
      x.noalias() = mu + lp * z;
      for (Eigen::Index i = 0; i < d; ++i) z(i) = g(rng);
      xt.noalias() = c.mu + c.K * (x - c.mu) + lq * z;
      parts[w].add((x - xt).squaredNorm());
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  detail::Welford total;
  for (const auto& p : parts) total.merge(p);
  MonteCarloEstimate r;
  r.trials = total.n;
  r.estimate = total.mean;
  r.standard_error = total.n > 1 ? std::sqrt(total.m2 / static_cast<double>(total.n - 1) / static_cast<double>(total.n)) : 0.0;
  return r;
}

inline MonteCarloEstimate mse_monte_carlo(const GaussianEnsemble& e, std::int64_t trials, std::uint64_t seed,
                                          unsigned workers = 1) {
  return mse_monte_carlo(e.mu(), e.Sigma(), conditional_outcome(e), trials, seed, workers);
}

struct IdentityReport {
  /// |det J − Z_ρ²/(det L² det Σ)| relative to the right-hand side.
  double det_identity = 0.0;
  /// Largest eigenvalue of symmetrized (I − J)(V_ρ − V_ρ₀); negative.
  double one_minus_j_max_eigenvalue = 0.0;
  /// Σ̃ from K against L⁻¹J⁻¹(V_σ + V_ρ₀)J^{-T}L^{-T}/2.
  double sigma_tilde_forms = 0.0;
  /// JL against the J-free outcome map.
  double outcome_map = 0.0;
  /// min ν(V_σ) − 1.
  double sigma_margin = 0.0;
  MseForms mse{};
};

inline IdentityReport identity_checks(const GaussianEnsemble& e) {
  const PGMDescription d = pgm_description(e);
  const Eigen::Index n2 = e.dim();
  const Matrix I = Matrix::Identity(n2, n2);
  IdentityReport r;

  const double z = normalization_z(d.rho);
  const double dl = e.L().determinant();
  const double rhs = z * z / (dl * dl * e.Sigma().determinant());
  r.det_identity = std::abs(d.J.determinant() - rhs) / std::abs(rhs);

  const Matrix m = (I - d.J) * (d.rho.cov() - e.rho0().cov());
  r.one_minus_j_max_eigenvalue = max_sym_eigenvalue(symmetrize(m));

  const ConditionalOutcome c = conditional_outcome(d, e);
  const Matrix lj_inv = (d.J * e.L()).partialPivLu().inverse();
  const Matrix alt = 0.5 * lj_inv * (d.sigma.cov() + e.rho0().cov()) * lj_inv.transpose();
  r.sigma_tilde_forms = (c.cov - alt).norm() / c.cov.norm();

  // Outcome map at unit probes: linear parts of the two formulas.
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n2; ++i) {
    const Vector x = e.mu() + I.col(i);
    const Vector y1 = outcome_from_parameter(d, e, x), y2 = outcome_from_parameter_direct(e, x);
    worst = std::max(worst, (y1 - y2).norm() / std::max(1.0, y1.norm()));
  }
  r.outcome_map = worst;
  r.sigma_margin = symplectic_spectrum(d.sigma.cov()).minCoeff() - 1.0;
  r.mse = mse_forms(d, e);
  return r;
}

}  // namespace gpgm
