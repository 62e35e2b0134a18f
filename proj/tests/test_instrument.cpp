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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gpgm/checks.hpp"
#include "gpgm/instrument.hpp"
#include "gpgm/quadrature.hpp"
#include "gpgm/random.hpp"

using namespace gpgm;

namespace {

const Matrix I2 = Matrix::Identity(2, 2);

GaussianEnsemble scalar_ensemble() { return GaussianEnsemble(GaussianState::centered(2.0 * I2), I2, Vector::Zero(2), I2); }

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(InstrumentScalar, Matrices) {
  const auto e = scalar_ensemble();
  const InstrumentDescription d = instrument_description(e, GaussianState::centered(2.0 * I2));
  EXPECT_LT((d.V5 - 3.5 * I2).norm(), 1e-12);
  EXPECT_LT((d.J5 - std::sqrt(15.0) / 2.0 * I2).norm(), 1e-12);
  // J₆ = √3·2/(2 + 3.5)/2 ... written out: (√3/2)·2/5.5
  EXPECT_LT((d.J6 - std::sqrt(3.0) / 5.5 * I2).norm(), 1e-12);
  // V₇ = 2 − 3/5.5
  EXPECT_LT((d.rho7.cov() - (2.0 - 3.0 / 5.5) * I2).norm(), 1e-12);
  EXPECT_NEAR(d.J7(0, 0), 0.353775, 1e-6);
  EXPECT_NEAR(d.z_matrix(0, 0), 0.685082, 1e-6);
  EXPECT_TRUE(d.rho7.mean().isZero(1e-15));
  EXPECT_NEAR(expected_output_state(d).cov()(0, 0), 2.142906, 1e-6);
}

TEST(InstrumentScalar, J7AlternateForm) {
  const auto e = scalar_ensemble();
  const InstrumentDescription d = instrument_description(e, GaussianState::centered(2.0 * I2));
  EXPECT_NEAR(d.J7(0, 0), (1.0 - std::sqrt(3.0) / 5.5) * 2.0 / std::sqrt(15.0), 1e-12);
  EXPECT_LE(instrument_checks(d, e).j7_forms, 1e-12);
}

TEST(Instrument, AtPriorMeanGivesRho7) {
  std::mt19937_64 rng(1);
  const GaussianEnsemble e = random_ensemble(rng, 2);
  const InstrumentDescription d = instrument_description(e, random_admissible_tau(rng, e));
  const GaussianState s = post_measurement_state(d, e.mu());
  EXPECT_EQ(s.mean(), d.rho7.mean());
  EXPECT_EQ(s.cov(), d.rho7.cov());
}

TEST(Instrument, RejectsTauAtAverageState) {
  const auto e = scalar_ensemble();
  try {
    instrument_description(e, GaussianState::centered(4.0 * I2));
    FAIL() << "expected a precondition error";
  } catch (const PreconditionError& err) {
    EXPECT_NEAR(err.margin(), 0.0, 1e-12);
  }
  EXPECT_THROW(instrument_description(e, GaussianState::centered(5.0 * I2)), PreconditionError);
}

TEST(Instrument, RejectsWrongDimension) {
  EXPECT_THROW(instrument_description(scalar_ensemble(), GaussianState::centered(2.0 * Matrix::Identity(4, 4))),
               DimensionError);
}

TEST(Instrument, ChecksOnRandomEnsembles) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    const GaussianEnsemble e = random_ensemble(rng, 1 + trial % 3);
    const InstrumentDescription d = instrument_description(e, random_admissible_tau(rng, e));
    const InstrumentChecks c = instrument_checks(d, e);
    EXPECT_GT(c.one_minus_j6_min_eigenvalue, 0.0);
    EXPECT_GT(c.v5_margin, 0.0);
    EXPECT_GT(c.rho7_margin, 0.0);
    EXPECT_GT(c.tau_tilde_margin, 0.0);
    EXPECT_LE(c.j7_forms, 1e-9);
  }
}

TEST(Instrument, CompositionAgreesWithClosedForm) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 15; ++trial) {
    const GaussianEnsemble e = random_ensemble(rng, 1 + trial % 3);
    const InstrumentDescription d = instrument_description(e, random_admissible_tau(rng, e));
    const InstrumentCompositionCheck c = instrument_composition_check(d, e, e.mu() + random_vector(rng, e.dim(), 0.5));
    EXPECT_LE(c.worst(), 1e-8);
  }
}

TEST(Instrument, OutcomeDensityNormalized) {
  const auto e = scalar_ensemble();
  Vector rt(2);
  rt << 0.4, -0.2;
  const InstrumentDescription d = instrument_description(e, GaussianState(rt, 2.5 * I2));
  // Centre the grid on the mode x* with y(x*) = r_τ.
  const Vector mode = parameter_from_outcome(d.pgm, e, rt);
  const QuadratureRule g = gauss_legendre(60, -8.0, 8.0);
  double total = 0.0;
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 60; ++j)
      total += g.weights(i) * g.weights(j) * outcome_density(d, e, mode + vec2(g.nodes(i), g.nodes(j)));
  EXPECT_NEAR(total, 1.0, 1e-10);
  EXPECT_GT(outcome_density(d, e, mode), outcome_density(d, e, mode + vec2(0.1, 0.0)));
  EXPECT_GT(outcome_density(d, e, mode), outcome_density(d, e, mode - vec2(0.0, 0.1)));
}

TEST(Instrument, RandomDensityNormalized) {
  std::mt19937_64 rng(4);
  const GaussianEnsemble e = random_ensemble(rng, 1);
  const InstrumentDescription d = instrument_description(e, random_admissible_tau(rng, e));
  const Matrix jl_inv = (d.pgm.J * e.L()).inverse();
  const Matrix cov_x = jl_inv * d.outcome_cov() * jl_inv.transpose();
  const Matrix lx = cov_x.llt().matrixL();
  const Vector mode = parameter_from_outcome(d.pgm, e, d.tau.mean());
  // Change variables x = mode + Lx u; then t(x)|det Lx| is the standard normal in u.
  const QuadratureRule g = gauss_legendre(60, -9.0, 9.0);
  double total = 0.0;
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 60; ++j)
      total += g.weights(i) * g.weights(j) * outcome_density(d, e, mode + lx * vec2(g.nodes(i), g.nodes(j)));
  EXPECT_NEAR(total * lx.determinant(), 1.0, 1e-10);
}

TEST(Instrument, MixtureMatchesExpectedOutput) {
  std::mt19937_64 rng(5);
  const GaussianEnsemble e = random_ensemble(rng, 1);
  const InstrumentDescription d = instrument_description(e, random_admissible_tau(rng, e));
  const Matrix ly = d.outcome_cov().llt().matrixL();
  const int samples = 200000;
  Vector sum = Vector::Zero(2);
  Matrix sq = Matrix::Zero(2, 2);
  for (int k = 0; k < samples; ++k) {
    const Vector y = d.tau.mean() + ly * standard_normal(rng, 2);
    const Vector m = post_measurement_state(d, parameter_from_outcome(d.pgm, e, y)).mean();
    sum += m;
    sq += m * m.transpose();
  }
  const Vector mean = sum / samples;
  const Matrix cov = d.rho7.cov() + 2.0 * (sq / samples - mean * mean.transpose());
  const GaussianState exact = expected_output_state(d);
  const Matrix spread = exact.cov() - d.rho7.cov();  // 2·Cov[z]
  for (int i = 0; i < 2; ++i) {
    EXPECT_LE(std::abs(mean(i) - exact.mean()(i)), 3.0 * std::sqrt(0.5 * spread(i, i) / samples));
    for (int j = 0; j < 2; ++j) {
      const double se = std::sqrt((spread(i, i) * spread(j, j) + spread(i, j) * spread(i, j)) / samples);
      EXPECT_LE(std::abs(cov(i, j) - exact.cov()(i, j)), 3.5 * se);
    }
  }
}

TEST(Instrument, ScalarMeanTransport) {
  const auto e = scalar_ensemble();
  Vector rt(2);
  rt << 0.6, 0.0;
  const InstrumentDescription d = instrument_description(e, GaussianState(rt, 2.0 * I2));
  // r₇ = J₆J₅r_τ and the output mean adds J₇r_τ.
  EXPECT_NEAR(d.rho7.mean()(0), std::sqrt(3.0) / 5.5 * std::sqrt(15.0) / 2.0 * 0.6, 1e-12);
  EXPECT_NEAR(expected_output_state(d).mean()(0), d.rho7.mean()(0) + d.J7(0, 0) * 0.6, 1e-12);
}
