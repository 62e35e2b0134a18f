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
#include <utility>

#include <Eigen/Eigenvalues>

#include "gpgm/types.hpp"

namespace gpgm {

struct QuadratureRule {
  Vector nodes;
  Vector weights;
};

/// K-point Gauss–Legendre rule on [lo, hi] (Golub–Welsch).
inline QuadratureRule gauss_legendre(int k, double lo = -1.0, double hi = 1.0) {
  if (k < 1) throw PreconditionError("gauss_legendre: need at least one node");
  Matrix jac = Matrix::Zero(k, k);
  for (int i = 1; i < k; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    jac(i, i - 1) = jac(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(jac);
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  QuadratureRule r{Vector(k), Vector(k)};
  for (int i = 0; i < k; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    r.nodes(i) = mid + half * es.eigenvalues()(i);
    r.weights(i) = 2.0 * v0 * v0 * half;
  }
  return r;
}

}  // namespace gpgm
