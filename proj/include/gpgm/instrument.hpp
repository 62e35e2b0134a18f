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

#include <Eigen/LU>

#include "gpgm/ensemble.hpp"
#include "gpgm/gaussian_state.hpp"
#include "gpgm/pgm.hpp"
#include "gpgm/symplectic.hpp"
#include "gpgm/types.hpp"

namespace gpgm {

inline constexpr double kLoewnerMargin = 1e-9;

/// Closed-form data of the instrument τ ↦ p(x)ρ_x^{1/2}ρ^{-1/2}τρ^{-1/2}ρ_x^{1/2}.
struct InstrumentDescription {
  Matrix V5, J5, J6, J7;
  GaussianState rho7;
  /// z = z_matrix (x − μ).
  Matrix z_matrix;
  Vector mu;
  GaussianState tau;
  PGMDescription pgm;
  Matrix L;

  /// Outcome y is distributed as N(r_τ, (V_τ + V_σ)/2).
  Matrix outcome_cov() const { return 0.5 * (tau.cov() + pgm.sigma.cov()); }
  /// |det(JL)|, the dy/dx Jacobian.
  double jacobian() const { return std::abs((pgm.J * L).determinant()); }
  Vector z_at(const Vector& x) const { return z_matrix * (x - mu); }
};

inline void require_loewner_below(const Matrix& v_tau, const Matrix& v_rho) {
  const double lo = min_sym_eigenvalue(v_rho - v_tau);
  if (!(lo > kLoewnerMargin)) {
    std::ostringstream os;
    os << "instrument: requires V_tau < V_rho strictly; smallest eigenvalue of V_rho - V_tau is " << lo;
    throw PreconditionError(os.str(), lo);
  }
}

inline InstrumentDescription instrument_description(const GaussianEnsemble& e, const GaussianState& tau) {
  if (tau.dim() != e.dim()) throw DimensionError("instrument_description: tau has the wrong mode count");
  tau.require_faithful("instrument tau");
  InstrumentDescription d;
  d.pgm = pgm_description(e);
  d.tau = tau;
  d.mu = e.mu();
  d.L = e.L();
  const Matrix& vr = d.pgm.rho.cov();
  const Vector& rr = d.pgm.rho.mean();
  const Matrix& v0 = e.rho0().cov();
  require_loewner_below(tau.cov(), vr);

  const Eigen::Index n2 = e.dim();
  const Matrix I = Matrix::Identity(n2, n2);
  const Matrix f = sqrt_factor(vr);
  const Matrix f0 = sqrt_factor(v0);
  const Matrix gap_inv = (vr - tau.cov()).partialPivLu().inverse();

  d.V5 = symmetrize(-vr + f * vr * gap_inv * vr * f.transpose());
  d.J5 = f * vr * gap_inv;
  const Matrix s_inv = (d.V5 + v0).partialPivLu().inverse();
  d.J6 = f0 * v0 * s_inv;
  d.J7 = 2.0 * (I - d.J6) * e.L() * e.Sigma() * e.L().transpose() *
         vr.partialPivLu().solve(inverse_sqrt_factor(vr));

  const Matrix v7 = symmetrize(v0 - f0 * v0 * s_inv * v0 * f0.transpose());
  d.rho7 = GaussianState(rr + d.J6 * d.J5 * (tau.mean() - rr), v7);

  const Matrix sigma_inv = Eigen::LLT<Matrix>(e.Sigma()).solve(I);
  d.z_matrix = 0.5 * d.J7 * f * vr * e.L().transpose().partialPivLu().inverse() * sigma_inv;

  for (const auto& [m, name] : {std::pair<const Matrix*, const char*>{&d.V5, "V5"}, {&v7, "V_rho7"}}) {
    const UncertaintyCheck c = check_uncertainty(*m);
    if (c.status != Physicality::faithful) {
      std::ostringstream os;
      os << "instrument_description: " << name << " is not faithful (margin " << c.margin << ")";
      throw ConsistencyError(os.str());
    }
  }
  if (!Eigen::FullPivLU<Matrix>(d.J7).isInvertible()) throw ConsistencyError("instrument_description: J7 is singular");
  return d;
}

/// D(−z)ρ₇D(z).
inline GaussianState post_measurement_state(const InstrumentDescription& d, const Vector& x) {
  require_length(x, d.mu.size(), "post_measurement_state");
  return GaussianState(d.rho7.mean() + d.z_at(x), d.rho7.cov());
}

/// Outcome density with respect to dy.
inline double outcome_density_y(const InstrumentDescription& d, const Vector& y) {
  return normal_density(y, d.tau.mean(), d.outcome_cov());
}

/// t(x) = |det(JL)|·N(y(x); r_τ, (V_τ + V_σ)/2), a density with respect to dx.
inline double outcome_density(const InstrumentDescription& d, const GaussianEnsemble& e, const Vector& x) {
  return d.jacobian() * outcome_density_y(d, outcome_from_parameter(d.pgm, e, x));
}

/// τ̃ = ∫ dx t(x) post_measurement_state(x).
inline GaussianState expected_output_state(const InstrumentDescription& d) {
  const Vector r = d.rho7.mean() + d.J7 * (d.tau.mean() - d.pgm.anchor);
  const Matrix v = symmetrize(d.rho7.cov() + d.J7 * (d.tau.cov() + d.pgm.sigma.cov()) * d.J7.transpose());
  GaussianState out(r, v);
  const UncertaintyCheck c = out.physicality();
  if (c.status != Physicality::faithful) {
    std::ostringstream os;
    os << "expected_output_state: result is not faithful (margin " << c.margin << ")";
    throw ConsistencyError(os.str());
  }
  return out;
}

struct InstrumentChecks {
  /// Smallest eigenvalue of symmetrized (I − J₆)(V₅ + V_ρ₀); positive.
  double one_minus_j6_min_eigenvalue = 0.0;
  double v5_margin = 0.0;
  double rho7_margin = 0.0;
  double tau_tilde_margin = 0.0;
  /// J₇ against (I − J₆)J⁻¹.
  double j7_forms = 0.0;
};

inline InstrumentChecks instrument_checks(const InstrumentDescription& d, const GaussianEnsemble& e) {
  const Eigen::Index n2 = e.dim();
  const Matrix I = Matrix::Identity(n2, n2);
  InstrumentChecks c;
  c.one_minus_j6_min_eigenvalue = min_sym_eigenvalue(symmetrize((I - d.J6) * (d.V5 + e.rho0().cov())));
  c.v5_margin = symplectic_spectrum(d.V5).minCoeff() - 1.0;
  c.rho7_margin = symplectic_spectrum(d.rho7.cov()).minCoeff() - 1.0;
  c.tau_tilde_margin = symplectic_spectrum(expected_output_state(d).cov()).minCoeff() - 1.0;
  const Matrix alt = (I - d.J6) * d.pgm.J.partialPivLu().inverse();
  c.j7_forms = (d.J7 - alt).norm() / d.J7.norm();
  return c;
}

}  // namespace gpgm
