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

#include "qcollapse/genfun.hpp"
#include "qcollapse/model.hpp"
#include "qcollapse/trajectory.hpp"
#include "qcollapse/types.hpp"

namespace qcollapse {

enum class DilationFlavor { kHermitian, kNonHermitian };

/// Unitary dilation of the contraction C on the doubled space H (x) C^2,
/// in 2x2 block form with d x d blocks.  Block (i, k) maps meter state k
/// to meter state i.
///
///   hermitian:      [ -(I-C^dag C)^(1/2)   C^dag              ]
///                   [  C                   (I-C C^dag)^(1/2)  ]
///
///   non-Hermitian:  [  C                   (I-C C^dag)^(1/2)  ]
///                   [ -(I-C^dag C)^(1/2)   C^dag              ]
struct DilationMatrix {
  int d = 0;
  Matrix s;  // 2d x 2d
  DilationFlavor flavor = DilationFlavor::kHermitian;
  double unitarity_defect = 0.0;     // ||S^dag S - I||
  double intertwining_defect = 0.0;  // residual of C S00 + S11 C etc.

  Matrix block(int i, int k) const { return s.block(i * d, k * d, d, d); }

  /// Meter vector whose repeated readout compresses the dilated
  /// evolution back to V_t: e1 for the hermitian flavor, e0 otherwise.
  Vector readout() const;
};

/// Meter basis vectors in C^2.
Vector meter_e0();
Vector meter_e1();

DilationMatrix build_dilation(const Matrix& contraction, DilationFlavor flavor);

/// Number of meter qubits the dilated state may accumulate.
inline constexpr int kMeterCap = 12;

/// State on H (x) (C^2)^(x n), flattened with the system index slowest
/// and the newest meter fastest: amp[h * 2^n + bits].
struct DilatedState {
  int dim_h = 0;
  int n_meters = 0;
  double t = 0.0;
  Vector amp;

  static DilatedState initial(const Vector& eta);
};

/// Free evolution exp(-iH dt) on the system factor, then optionally a
/// scattering event: adjoin a fresh meter in e0 and apply S on the
/// system (x) newest-meter pair.  Throws MeterBudgetExceeded past kMeterCap.
DilatedState dilated_step(const DilationMatrix& dilation,
                          const ValidatedModel& model,
                          const DilatedState& state, double dt_free,
                          bool apply_jump);

/// Contract every meter factor against e_out, returning a vector in H.
Vector compress(const DilatedState& state, const Vector& e_out);

/// Run the dilated evolution along a counting trajectory up to time t.
DilatedState evolve_dilated(const DilationMatrix& dilation,
                            const ValidatedModel& model,
                            const JumpRecord& jumps, const Vector& eta,
                            double t);

/// Coherent matrix elements U_t(g*, f*) of the dilated QSDE for C^2-valued
/// exponential test vectors g* = (g0, g1), f* = (f0, f1): RK4 path of
///   dU/dt + iHU = [ g_i (S - I d)^i_k f^k
///                   + sqrt(lambda) (g_i (S - I d)^i_0 + (S - I d)^0_k f^k)
///                   + lambda (S^0_0 - I) ] U
/// with g_i the conjugated components.
std::vector<Matrix> coherent_matrix_ode(
    const ValidatedModel& model, const DilationMatrix& dilation,
    const TestFunction& g0, const TestFunction& g1, const TestFunction& f0,
    const TestFunction& f1, const std::vector<double>& grid);

/// Large-number limit of the coherent-element dynamics:
///   dU/dt + (R + iH) U = (R + R^dag)^(1/2) U (f1(t) - conj(g1)(t)).
std::vector<Matrix> limiting_coherent_ode(const Matrix& hamiltonian,
                                          const Matrix& rate,
                                          const TestFunction& g1,
                                          const TestFunction& f1,
                                          const std::vector<double>& grid);

/// || S(lambda) - (I + lambda^(-1/2) B - lambda^(-1) D) || for the
/// non-Hermitian dilation of C = I - R/lambda, with B the off-diagonal
/// defect-root block matrix and D = diag(R, R^dag).
double expansion_residual(const Matrix& rate, double lambda);

}  // namespace qcollapse
