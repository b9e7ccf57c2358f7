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

#include "qcollapse/model.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "qcollapse/linalg.hpp"

namespace qcollapse {

namespace {

void require_square(const Matrix& m, int dim, const char* name) {
  if (m.rows() != dim || m.cols() != dim) {
    throw Error(ErrorCode::ParseError,
                std::string(name) + ": expected " + std::to_string(dim) + "x" +
                    std::to_string(dim) + " matrix");
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::ParseError,
                std::string(name) + ": non-finite entries");
  }
}

}  // namespace

ValidatedModel::ValidatedModel(ModelSpec spec) : spec_(std::move(spec)) {
  if (spec_.dim <= 0) {
    throw Error(ErrorCode::ParseError, "model dimension must be positive");
  }
  require_square(spec_.hamiltonian, spec_.dim, "H");
  require_square(spec_.collapse, spec_.dim, "C");
  if (spec_.lambda < 0.0) {
    throw Error(ErrorCode::NegativeIntensity,
                "lambda must be nonnegative, got " +
                    std::to_string(spec_.lambda));
  }
  if (hermiticity_defect(spec_.hamiltonian) > kTolHerm) {
    throw Error(ErrorCode::NotHermitian, "H is not Hermitian");
  }
  if (spec_.rate) {
    require_square(*spec_.rate, spec_.dim, "R");
    if (spec_.lambda <= 0.0) {
      throw Error(ErrorCode::InconsistentR,
                  "rate operator requires lambda > 0");
    }
    const Matrix derived =
        Matrix::Identity(spec_.dim, spec_.dim) - *spec_.rate / spec_.lambda;
    if (spectral_norm(derived - spec_.collapse) > kTolHerm) {
      throw Error(ErrorCode::InconsistentR,
                  "C does not equal I - R/lambda within tolerance");
    }
  }

  Eigen::SelfAdjointEigenSolver<Matrix> h_eig(
      0.5 * (spec_.hamiltonian + spec_.hamiltonian.adjoint()));
  h_vals_ = h_eig.eigenvalues();
  h_vecs_ = h_eig.eigenvectors();

  const Matrix defect = Matrix::Identity(spec_.dim, spec_.dim) -
                        spec_.collapse.adjoint() * spec_.collapse;
  Eigen::SelfAdjointEigenSolver<Matrix> d_eig(0.5 *
                                              (defect + defect.adjoint()));
  defect_vals_ = d_eig.eigenvalues();
  defect_vecs_ = d_eig.eigenvectors();
  if (defect_vals_.minCoeff() < -kTolPsd) {
    throw Error(ErrorCode::NotContraction,
                "C is not a contraction: eigenvalue of I - C^dag C is " +
                    std::to_string(defect_vals_.minCoeff()));
  }
}

Matrix ValidatedModel::free_propagator(double dt) const {
  Vector phases(spec_.dim);
  for (int i = 0; i < spec_.dim; ++i) {
    phases[i] = std::exp(Complex(0.0, -h_vals_[i] * dt));
  }
  return h_vecs_ * phases.asDiagonal() * h_vecs_.adjoint();
}

ValidatedModel validate_model(const ModelSpec& spec) {
  return ValidatedModel(spec);
}

Matrix semigroup_generator(const ValidatedModel& model) {
  const Matrix ident = Matrix::Identity(model.dim(), model.dim());
  return Complex(0.0, 1.0) * model.hamiltonian() +
         model.lambda() * (ident - model.collapse());
}

Matrix limit_generator(const ValidatedModel& model) {
  if (!model.rate()) {
    throw Error(ErrorCode::InconsistentR,
                "limit generator requires a rate operator");
  }
  return Complex(0.0, 1.0) * model.hamiltonian() + *model.rate();
}

ValidatedModel model_from_rate(const Matrix& hamiltonian, const Matrix& rate,
                               double lambda) {
  ModelSpec spec;
  spec.dim = static_cast<int>(hamiltonian.rows());
  spec.hamiltonian = hamiltonian;
  spec.collapse = Matrix::Identity(spec.dim, spec.dim) - rate / lambda;
  spec.lambda = lambda;
  spec.rate = rate;
  return ValidatedModel(std::move(spec));
}

}  // namespace qcollapse
