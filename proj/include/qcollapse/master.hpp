// Copyright 2026 The qcollapse authors
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

#include "qcollapse/model.hpp"
#include "qcollapse/types.hpp"

namespace qcollapse {

/// Fixed-step RK4 for the averaged master equation
///   drho/dt = -i[H, rho] + lambda (C rho C^dag - rho).
/// Substep = min(grid spacing, 1e-3 / (1 + lambda)).  Throws StepTooLarge
/// if the Hermiticity drift of the iterate exceeds 1e-8.
DensityPath integrate_master(const ValidatedModel& model, const Matrix& sigma,
                             const std::vector<double>& grid);

/// Result of the series evaluation, with the truncation order actually used.
struct DysonResult {
  Matrix rho;
  int order = 0;       // highest term included
  int nodes = 0;       // quadrature nodes per axis at convergence
  double tail = 0.0;   // Poisson bound on the first omitted term
};

/// Independent Dyson-von Neumann series oracle for the master equation,
/// evaluated in the interaction picture on Gauss-Legendre nodes.  The
/// series is truncated once the Poisson term bound (lambda t)^n / n!
/// e^(-lambda t) falls below tol; quadrature is refined until two node
/// counts agree to tol/10.  Throws TruncationBudgetExceeded past n_cap.
DysonResult dyson_series(const ValidatedModel& model, const Matrix& sigma,
                         double t, double tol, int n_cap = 40);

/// Closed-form nonmixing evolution rho(t) = exp(-Kt) sigma exp(-K^dag t)
/// with K = iH + R.  Requires the rate operator.
DensityPath contraction_semigroup(const ValidatedModel& model,
                                  const Matrix& sigma,
                                  const std::vector<double>& grid);

}  // namespace qcollapse
