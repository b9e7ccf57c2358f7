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

#include "qcollapse/dilation.hpp"

#include <cmath>
#include <functional>
#include <set>

#include "qcollapse/linalg.hpp"

namespace qcollapse {

Vector meter_e0() {
  Vector e(2);
  e << Complex(1.0, 0.0), Complex(0.0, 0.0);
  return e;
}

Vector meter_e1() {
  Vector e(2);
  e << Complex(0.0, 0.0), Complex(1.0, 0.0);
  return e;
}

Vector DilationMatrix::readout() const {
  return flavor == DilationFlavor::kHermitian ? meter_e1() : meter_e0();
}

DilationMatrix build_dilation(const Matrix& contraction,
                              DilationFlavor flavor) {
  const int d = static_cast<int>(contraction.rows());
  const Matrix ident = Matrix::Identity(d, d);
  const Matrix defect_in = ident - contraction.adjoint() * contraction;
  if (min_eigenvalue(defect_in) < -kTolPsd) {
    throw Error(ErrorCode::NotContraction,
                "dilation requires a contraction");
  }
  const Matrix b0 = psd_sqrt(defect_in);
  const Matrix b1 = psd_sqrt(ident - contraction * contraction.adjoint());

  DilationMatrix dil;
  dil.d = d;
  dil.flavor = flavor;
  dil.s.resize(2 * d, 2 * d);
  if (flavor == DilationFlavor::kHermitian) {
    dil.s.block(0, 0, d, d) = -b0;
    dil.s.block(0, d, d, d) = contraction.adjoint();
    dil.s.block(d, 0, d, d) = contraction;
    dil.s.block(d, d, d, d) = b1;
  } else {
    dil.s.block(0, 0, d, d) = contraction;
    dil.s.block(0, d, d, d) = b1;
    dil.s.block(d, 0, d, d) = -b0;
    dil.s.block(d, d, d, d) = contraction.adjoint();
  }

  dil.unitarity_defect = spectral_norm(
      dil.s.adjoint() * dil.s - Matrix::Identity(2 * d, 2 * d));
  dil.intertwining_defect = std::max(
      spectral_norm(contraction * (-b0) + b1 * contraction),
      spectral_norm((-b0) * contraction.adjoint() + contraction.adjoint() * b1));
  if (dil.unitarity_defect > 1e-10 || dil.intertwining_defect > 1e-10) {
    throw Error(ErrorCode::NotContraction,
                "dilation blocks failed the unitarity check");
  }
  return dil;
}

DilatedState DilatedState::initial(const Vector& eta) {
  DilatedState state;
  state.dim_h = static_cast<int>(eta.size());
  state.n_meters = 0;
  state.t = 0.0;
  state.amp = eta;
  return state;
}

DilatedState dilated_step(const DilationMatrix& dilation,
                          const ValidatedModel& model,
                          const DilatedState& state, double dt_free,
                          bool apply_jump) {
  if (dt_free < 0.0) throw std::invalid_argument("dt_free must be >= 0");
  const int d = state.dim_h;
  const long meters = 1L << state.n_meters;

  DilatedState next = state;
  next.t += dt_free;

  if (dt_free > 0.0) {
    const Matrix u = model.free_propagator(dt_free);
    // amp[h * meters + m] viewed as column-major (meters x d).
    Eigen::Map<Matrix> view(next.amp.data(), meters, d);
    view = view * u.transpose();
  }

  if (!apply_jump) return next;

  if (state.n_meters + 1 > kMeterCap) {
    throw Error(ErrorCode::MeterBudgetExceeded,
                "dilated state would exceed " + std::to_string(kMeterCap) +
                    " meter qubits");
  }

  // Adjoin the fresh meter in e0 as the fastest index.
  Vector grown = Vector::Zero(d * meters * 2);
  for (long idx = 0; idx < d * meters; ++idx) {
    grown[2 * idx] = next.amp[idx];
  }

  // Apply S to the (system, newest meter) pair for every old-meter word.
  Vector in(2 * d), out(2 * d);
  for (long m = 0; m < meters; ++m) {
    for (int k = 0; k < 2; ++k) {
      for (int h = 0; h < d; ++h) {
        in[k * d + h] = grown[(static_cast<long>(h) * meters + m) * 2 + k];
      }
    }
    out = dilation.s * in;
    for (int k = 0; k < 2; ++k) {
      for (int h = 0; h < d; ++h) {
        grown[(static_cast<long>(h) * meters + m) * 2 + k] = out[k * d + h];
      }
    }
  }

  next.amp = std::move(grown);
  next.n_meters += 1;
  return next;
}

Vector compress(const DilatedState& state, const Vector& e_out) {
  if (std::abs(e_out.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("readout vector must be normalized");
  }
  const int d = state.dim_h;
  Vector result = Vector::Zero(d);
  const long meters = 1L << state.n_meters;
  for (int h = 0; h < d; ++h) {
    Complex acc(0.0, 0.0);
    for (long m = 0; m < meters; ++m) {
      Complex weight(1.0, 0.0);
      for (int j = 0; j < state.n_meters; ++j) {
        const int bit = static_cast<int>((m >> (state.n_meters - 1 - j)) & 1);
        weight *= std::conj(e_out[bit]);
      }
      acc += weight * state.amp[h * meters + m];
    }
    result[h] = acc;
  }
  return result;
}

DilatedState evolve_dilated(const DilationMatrix& dilation,
                            const ValidatedModel& model,
                            const JumpRecord& jumps, const Vector& eta,
                            double t) {
  DilatedState state = DilatedState::initial(eta);
  double cur = 0.0;
  for (double tj : jumps.times) {
    if (tj >= t) break;
    state = dilated_step(dilation, model, state, tj - cur, true);
    cur = tj;
  }
  return dilated_step(dilation, model, state, t - cur, false);
}

namespace {

std::vector<double> merged_cells(const std::vector<double>& grid,
                                 std::initializer_list<const TestFunction*> fns) {
  std::set<double> points(grid.begin(), grid.end());
  for (const TestFunction* f : fns) {
    for (double b : f->grid()) {
      if (b > 0.0 && b < grid.back()) points.insert(b);
    }
  }
  return {points.begin(), points.end()};
}

std::vector<Matrix> integrate_piecewise(
    const std::vector<double>& grid, const std::vector<double>& breaks,
    const std::function<Matrix(double)>& generator_at) {
  std::vector<Matrix> out;
  out.reserve(grid.size());
  if (grid.size() == 1) {
    const Matrix gen = generator_at(0.0);
    out.push_back(Matrix::Identity(gen.rows(), gen.cols()));
    return out;
  }
  Matrix u;
  std::size_t next_output = 1;
  for (std::size_t b = 1; b < breaks.size(); ++b) {
    const double lo = breaks[b - 1];
    const double hi = breaks[b];
    const Matrix gen = generator_at(lo);
    if (b == 1) {
      u = Matrix::Identity(gen.rows(), gen.cols());
      out.push_back(u);
    }
    const double bound = std::max(1.0, spectral_norm(gen));
    const double h_max = std::min(1e-3, 0.05 / bound);
    const int n_sub =
        std::max(1, static_cast<int>(std::ceil((hi - lo) / h_max)));
    const double dt = (hi - lo) / n_sub;
    for (int s = 0; s < n_sub; ++s) {
      const Matrix k1 = gen * u;
      const Matrix k2 = gen * (u + 0.5 * dt * k1);
      const Matrix k3 = gen * (u + 0.5 * dt * k2);
      const Matrix k4 = gen * (u + dt * k3);
      u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (next_output < grid.size() && grid[next_output] == hi) {
      out.push_back(u);
      ++next_output;
    }
  }
  return out;
}

}  // namespace

std::vector<Matrix> coherent_matrix_ode(
    const ValidatedModel& model, const DilationMatrix& dilation,
    const TestFunction& g0, const TestFunction& g1, const TestFunction& f0,
    const TestFunction& f1, const std::vector<double>& grid) {
  if (grid.empty() || grid.front() != 0.0) {
    throw std::invalid_argument("grid must start at 0");
  }
  for (const TestFunction* fn : {&g0, &g1, &f0, &f1}) {
    if (fn->lambda_ref() != model.lambda()) {
      throw Error(ErrorCode::LambdaMismatch,
                  "test functions must carry the model intensity");
    }
  }

  const int d = model.dim();
  const Complex im(0.0, 1.0);
  const double lambda = model.lambda();
  const double root = std::sqrt(lambda);
  const Matrix ident = Matrix::Identity(d, d);

  Matrix delta[2][2];
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 2; ++k) {
      delta[i][k] = dilation.block(i, k) - (i == k ? ident : Matrix::Zero(d, d));
    }
  }

  auto generator_at = [&](double r) -> Matrix {
    const Complex g[2] = {std::conj(g0.value_at(r)), std::conj(g1.value_at(r))};
    const Complex f[2] = {f0.value_at(r), f1.value_at(r)};
    Matrix a = lambda * delta[0][0];
    for (int i = 0; i < 2; ++i) {
      a += root * g[i] * delta[i][0];
      a += root * delta[0][i] * f[i];
      for (int k = 0; k < 2; ++k) {
        a += g[i] * f[k] * delta[i][k];
      }
    }
    return a - im * model.hamiltonian();
  };

  const std::vector<double> breaks = merged_cells(grid, {&g0, &g1, &f0, &f1});
  return integrate_piecewise(grid, breaks, generator_at);
}

std::vector<Matrix> limiting_coherent_ode(const Matrix& hamiltonian,
                                          const Matrix& rate,
                                          const TestFunction& g1,
                                          const TestFunction& f1,
                                          const std::vector<double>& grid) {
  if (grid.empty() || grid.front() != 0.0) {
    throw std::invalid_argument("grid must start at 0");
  }
  if (min_eigenvalue(rate + rate.adjoint()) < -kTolPsd) {
    throw Error(ErrorCode::NotDissipative, "R + R^dag must be PSD");
  }
  const Complex im(0.0, 1.0);
  const Matrix noise_root = psd_sqrt(rate + rate.adjoint());
  const Matrix k_op = rate + im * hamiltonian;

  auto generator_at = [&](double r) -> Matrix {
    const Complex drive = f1.value_at(r) - std::conj(g1.value_at(r));
    return -k_op + drive * noise_root;
  };

  const std::vector<double> breaks = merged_cells(grid, {&g1, &f1});
  return integrate_piecewise(grid, breaks, generator_at);
}

double expansion_residual(const Matrix& rate, double lambda) {
  const int d = static_cast<int>(rate.rows());
  const Matrix contraction = Matrix::Identity(d, d) - rate / lambda;
  const DilationMatrix dil =
      build_dilation(contraction, DilationFlavor::kNonHermitian);

  const Matrix noise_root = psd_sqrt(rate + rate.adjoint());
  Matrix truncation = Matrix::Identity(2 * d, 2 * d);
  truncation.block(0, d, d, d) += noise_root / std::sqrt(lambda);
  truncation.block(d, 0, d, d) -= noise_root / std::sqrt(lambda);
  truncation.block(0, 0, d, d) -= rate / lambda;
  truncation.block(d, d, d, d) -= rate.adjoint() / lambda;

  return spectral_norm(dil.s - truncation);
}

}  // namespace qcollapse
