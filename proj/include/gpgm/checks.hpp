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

// Cross-checks of the closed forms against golden-rule compositions of the
// underlying operator products.

#include <algorithm>

#include "gpgm/ensemble.hpp"
#include "gpgm/instrument.hpp"
#include "gpgm/pgm.hpp"
#include "gpgm/quadratic_exponent.hpp"
#include "gpgm/symplectic.hpp"

namespace gpgm {

struct CompositionCheck {
  double covariance = 0.0;  ///< relative, covariance read off the product
  double mean = 0.0;        ///< relative to max(1, |expected|)
  double product = 0.0;     ///< exp-product residual of the composition itself

  double worst() const { return std::max({covariance, mean, product}); }
};

namespace detail {

inline CompositionCheck compare_state(const CMatrix& product, const GaussianState& expected) {
  const QuadraticExponent q = log_embedded(product);
  CompositionCheck c;
  c.product = (exp_embedded(q) - product).norm() / product.norm();
  const GaussianState got = state_from_exponent(q);
  c.covariance = (got.cov() - expected.cov()).norm() / expected.cov().norm();
  c.mean = (got.mean() - expected.mean()).norm() / std::max(1.0, expected.mean().norm());
  return c;
}

inline CMatrix sandwich(const GaussianState& outer, double t, const GaussianState& inner) {
  const CMatrix o = exp_embedded(gaussian_exponent(outer, t));
  return o * exp_embedded(gaussian_exponent(inner, -1.0)) * o;
}

}  // namespace detail

/// ρ^{-1/2}ρ_xρ^{-1/2} ∝ D(−y)σD(y).
inline CompositionCheck pgm_composition_check(const PGMDescription& d, const GaussianEnsemble& e, const Vector& x) {
  return detail::compare_state(detail::sandwich(d.rho, 0.5, state_at(e, x)), povm_state(d, e, x));
}

struct InstrumentCompositionCheck {
  /// ρ^{-1/2}τρ^{-1/2} ∝ Gaussian with covariance V₅.
  CompositionCheck inner;
  /// ρ_x^{1/2}(·)ρ_x^{1/2} of the above ∝ D(−z)ρ₇D(z).
  CompositionCheck outer;

  double worst() const { return std::max(inner.worst(), outer.worst()); }
};

inline InstrumentCompositionCheck instrument_composition_check(const InstrumentDescription& d,
                                                               const GaussianEnsemble& e, const Vector& x) {
  const Vector& rr = d.pgm.anchor;
  const GaussianState five(rr + d.J5 * (d.tau.mean() - rr), d.V5);
  InstrumentCompositionCheck c;
  c.inner = detail::compare_state(detail::sandwich(d.pgm.rho, 0.5, d.tau), five);
  c.outer = detail::compare_state(detail::sandwich(state_at(e, x), -0.5, five), post_measurement_state(d, x));
  return c;
}

}  // namespace gpgm
