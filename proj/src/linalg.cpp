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

#include "qcollapse/linalg.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace qcollapse {

Matrix expm(const Matrix& a) {
  // Pade coefficients for the (13,13) approximant.
  static const double b[] = {64764752532480000.0,
                             32382376266240000.0,
                             7771770303897600.0,
                             1187353796428800.0,
                             129060195264000.0,
                             10559470521600.0,
                             670442572800.0,
                             33522128640.0,
                             1323241920.0,
                             40840800.0,
                             960960.0,
                             16380.0,
                             182.0,
                             1.0};
  const double theta13 = 5.371920351148152;

  const Eigen::Index n = a.rows();
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();  // 1-norm
  int squarings = 0;
  if (norm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
  }
  const Matrix as = a / std::pow(2.0, squarings);

  const Matrix ident = Matrix::Identity(n, n);
  const Matrix a2 = as * as;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;

  const Matrix u =
      as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
            b[5] * a4 + b[3] * a2 + b[1] * ident);
  const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
                   b[4] * a4 + b[2] * a2 + b[0] * ident;

  Matrix f = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) {
    f = f * f;
  }
  return f;
}

Matrix psd_sqrt(const Matrix& a) {
  if (hermiticity_defect(a) > kTolHerm) {
    throw Error(ErrorCode::NotHermitian, "psd_sqrt: matrix is not Hermitian");
  }
  const Matrix herm = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(herm);
  Eigen::VectorXd vals = eig.eigenvalues();
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals[i] < -kTolPsd) {
      throw Error(ErrorCode::TooNegative,
                  "psd_sqrt: eigenvalue " + std::to_string(vals[i]) +
                      " below -" + std::to_string(kTolPsd));
    }
    vals[i] = vals[i] < 0.0 ? 0.0 : std::sqrt(vals[i]);
  }
  Matrix root = eig.eigenvectors() * vals.asDiagonal() *
                eig.eigenvectors().adjoint();
  return 0.5 * (root + root.adjoint());
}

double spectral_norm(const Matrix& a) {
  return Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
}

double hermiticity_defect(const Matrix& a) {
  return spectral_norm(a - a.adjoint());
}

double min_eigenvalue(const Matrix& a) {
  const Matrix herm = 0.5 * (a + a.adjoint());
  return Eigen::SelfAdjointEigenSolver<Matrix>(herm).eigenvalues().minCoeff();
}

double trace_distance(const Matrix& a, const Matrix& b) {
  const Matrix diff = 0.5 * ((a - b) + (a - b).adjoint());
  const Eigen::VectorXd vals =
      Eigen::SelfAdjointEigenSolver<Matrix>(diff).eigenvalues();
  return 0.5 * vals.cwiseAbs().sum();
}

Matrix random_matrix(int dim, Philox& rng) {
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      m(i, j) = Complex(2.0 * rng.next_double() - 1.0,
                        2.0 * rng.next_double() - 1.0);
    }
  }
  return m;
}

Matrix random_contraction(int dim, Philox& rng, double margin) {
  const Matrix m = random_matrix(dim, rng);
  return m / (spectral_norm(m) * (1.0 + margin));
}

Matrix random_hermitian_psd(int dim, Philox& rng) {
  const Matrix m = random_matrix(dim, rng);
  const Matrix p = m * m.adjoint();
  return p / spectral_norm(p);
}

Vector random_state(int dim, Philox& rng) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) {
    v[i] = Complex(rng.next_normal(), rng.next_normal());
  }
  return v / v.norm();
}

}  // namespace qcollapse
