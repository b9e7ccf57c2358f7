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

#include <cstdint>

#include "qcollapse/quadrature.hpp"
#include "qcollapse/trajectory.hpp"
#include "qcollapse/types.hpp"

namespace qcollapse {

/// Piecewise-constant complex test function on a time grid, f(t) =
/// values[k] on [grid[k], grid[k+1]) and 0 outside.  Admissibility
/// |1 + lambda^(-1/2) f| <= 1 is enforced at construction, so stochastic
/// exponents of a TestFunction are bounded on every trajectory.
class TestFunction {
 public:
  TestFunction(std::vector<double> grid, std::vector<Complex> values,
               double lambda_ref);

  /// The zero test function on a single cell [0, t_max).
  static TestFunction zero(double t_max, double lambda_ref);
  /// Constant value on [0, t_max); must be admissible.
  static TestFunction constant(Complex value, double t_max, double lambda_ref);

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<Complex>& values() const { return values_; }
  double lambda_ref() const { return lambda_ref_; }

  Complex value_at(double t) const;
  /// Exact integral over [0, t] (finite sum over cells).
  Complex integral(double t) const;
  /// Exact integral of (this * other) over [0, t]; grids must match.
  Complex product_integral(const TestFunction& other, double t) const;
  /// Largest |value| over the cells.
  double max_abs() const;

  TestFunction conjugated() const;

 private:
  std::vector<double> grid_;
  std::vector<Complex> values_;
  double lambda_ref_;
};

/// Cellwise composition f (+.) g = f + lambda^(-1/2) f g + g, the test
/// function whose stochastic exponent is the product of the two factors
/// up to exp(int g f).
TestFunction dot_plus(const TestFunction& f, const TestFunction& g);

/// Closed-form stochastic exponent
///   eps_t^f(w) = exp(-sqrt(lambda) int_0^t f) prod_{r in w_t} (1 +
///   f(r)/sqrt(lambda)).
Complex stochastic_exponent(const TestFunction& f, const JumpRecord& jumps,
                            double t);

/// Operator-valued generating functional: RK4 path of the ODE
///   dV/dt = -[iH + lambda (I - C)(1 + lambda^(-1/2) f(t))] V,  V(0) = I,
/// with substeps aligned to both the output grid and the cells of f.
std::vector<Matrix> breve_propagator(const ValidatedModel& model,
                                     const TestFunction& f,
                                     const std::vector<double>& grid);

/// State path chi(f) along the output grid (the same ODE applied to eta0).
std::vector<Vector> genfun_ode(const ValidatedModel& model,
                               const TestFunction& f, const Vector& eta0,
                               const std::vector<double>& grid);

struct McVector {
  Vector mean;
  double stderr = 0.0;
};

struct McScalar {
  Complex mean;
  double stderr = 0.0;
};

/// Monte Carlo estimate of the generating functional at time t: the
/// mean of chi_t(w) eps_t^f(w) over sampled trajectories, with the
/// block-deterministic reduction shared with ensemble_average.
McVector genfun_mc(const ValidatedModel& model, const TestFunction& f,
                   const Vector& eta0, int n_trajectories, double t,
                   std::uint64_t seed_base, unsigned workers = 0);

/// Monte Carlo mean of eps_t^f (target 1 for f = g (+.) h forms).
McScalar mc_exponent_mean(const TestFunction& f, int n_trajectories, double t,
                          std::uint64_t seed_base, unsigned workers = 0);

/// Monte Carlo mean of eps_t^f eps_t^g (target exp(int g f)).
McScalar mc_exponent_pair_mean(const TestFunction& f, const TestFunction& g,
                               int n_trajectories, double t,
                               std::uint64_t seed_base, unsigned workers = 0);

/// Chaos-expansion kernel at an ordered tuple r_1 < ... < r_n < t:
///   exp(-(t - r_n) K) (C - I) ... (C - I) exp(-r_1 K) eta,
/// with K the averaged-dynamics generator.  n = 0 gives exp(-Kt) eta.
Vector tilde_kernel(const ValidatedModel& model, const Vector& eta,
                    const std::vector<double>& tuple, double t);

/// Kernels of orders 0..max_order tabulated on the ordered tuples of a
/// shared Gauss-Legendre node set (ties included for quadrature).
struct KernelTable {
  int max_order = 0;
  double t = 0.0;
  GaussLegendre rule;
  // values[n][rank(tuple)] with tuples enumerated in lexicographic order
  // over non-decreasing node-index tuples.
  std::vector<std::vector<Vector>> values;
};

/// Enumerate the non-decreasing index tuples of length n over m nodes in
/// lexicographic order.
std::vector<std::vector<int>> nondecreasing_tuples(int m, int n);

/// Table of the model kernels (tilde transform of the trajectory state).
KernelTable model_kernel_table(const ValidatedModel& model, const Vector& eta,
                               double t, int max_order, int nodes);

/// Table of the exponential kernels g(r_1)...g(r_n) carried by a fixed
/// direction vector in the system space.
KernelTable exponential_kernel_table(const TestFunction& g, double t,
                                     int max_order, int nodes,
                                     const Vector& direction);

struct KernelInnerProduct {
  Complex value;
  double last_term_ratio = 0.0;
  bool truncation_warning = false;  // last-term ratio above 1e-3
};

/// Fock-space inner product (phi | chi) = sum_n int_simplex phi^dag chi,
/// evaluated by symmetrized Gauss-Legendre product quadrature through
/// n_max (<= 4).
KernelInnerProduct kernel_inner_product(const KernelTable& phi,
                                        const KernelTable& chi, int n_max);

}  // namespace qcollapse
