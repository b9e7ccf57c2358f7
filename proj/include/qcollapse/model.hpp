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

#include <optional>

#include "qcollapse/types.hpp"

namespace qcollapse {

/// Unstable-system model: Hamiltonian H, collapse contraction C, event
/// intensity lambda, and optionally the rate operator R with C = I - R/lambda.
struct ModelSpec {
  int dim = 0;
  Matrix hamiltonian;
  Matrix collapse;
  double lambda = 0.0;
  std::optional<Matrix> rate;
};

/// Immutable validated model with cached eigendecompositions; shareable
/// across worker threads.
class ValidatedModel {
 public:
  /// Checks all model invariants; throws Error on violation.
  explicit ValidatedModel(ModelSpec spec);

  int dim() const { return spec_.dim; }
  double lambda() const { return spec_.lambda; }
  const Matrix& hamiltonian() const { return spec_.hamiltonian; }
  const Matrix& collapse() const { return spec_.collapse; }
  const std::optional<Matrix>& rate() const { return spec_.rate; }

  /// exp(-i H dt), evaluated in the cached eigenbasis of H.
  Matrix free_propagator(double dt) const;

  /// Real eigenvalues of H.
  const Eigen::VectorXd& hamiltonian_eigenvalues() const { return h_vals_; }

  /// Eigenvalues of the collapse defect I - C^dag C (all >= -kTolPsd).
  const Eigen::VectorXd& defect_eigenvalues() const { return defect_vals_; }

 private:
  ModelSpec spec_;
  Eigen::VectorXd h_vals_;
  Matrix h_vecs_;
  Eigen::VectorXd defect_vals_;
  Matrix defect_vecs_;
};

ValidatedModel validate_model(const ModelSpec& spec);

/// K = iH + lambda (I - C), the generator of the contraction semigroup
/// exp(-Kt) for the averaged dynamics.
Matrix semigroup_generator(const ValidatedModel& model);

/// Large-number limit form K = iH + R; requires the rate operator.
Matrix limit_generator(const ValidatedModel& model);

/// Model with collapse I - R/lambda derived from a rate operator.
ValidatedModel model_from_rate(const Matrix& hamiltonian, const Matrix& rate,
                               double lambda);

}  // namespace qcollapse
