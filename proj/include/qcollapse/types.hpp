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

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qcollapse {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Absolute spectral-norm tolerance for Hermiticity checks.
inline constexpr double kTolHerm = 1e-10;
/// Eigenvalue floor for positive-semidefiniteness checks.
inline constexpr double kTolPsd = 1e-10;
/// Survival probabilities below this have no conditional state.
inline constexpr double kQFloor = 1e-14;

enum class ErrorCode {
  NotHermitian,
  NotContraction,
  NegativeIntensity,
  InconsistentR,
  TooNegative,
  StepTooLarge,
  TruncationBudgetExceeded,
  InadmissibleTestFunction,
  LambdaMismatch,
  GridMismatch,
  UnorderedTuple,
  MeterBudgetExceeded,
  NotDissipative,
  ParseError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Time grid plus one density matrix (and its trace) per grid point.
struct DensityPath {
  std::vector<double> grid;
  std::vector<Matrix> rho;
  std::vector<double> trace;

  std::size_t size() const { return grid.size(); }
};

}  // namespace qcollapse
