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

#include "qcollapse/master.hpp"

#include <cmath>

#include "qcollapse/linalg.hpp"
#include "qcollapse/quadrature.hpp"

namespace qcollapse {

namespace {

void check_master_grid(const std::vector<double>& grid) {
  if (grid.empty() || grid.front() != 0.0) {
    throw std::invalid_argument("grid must start at 0");
  }
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (grid[k] <= grid[k - 1]) {
      throw std::invalid_argument("grid must be strictly increasing");
    }
  }
}

}  // namespace

DensityPath integrate_master(const ValidatedModel& model, const Matrix& sigma,
                             const std::vector<double>& grid) {
  check_master_grid(grid);

  const Complex im(0.0, 1.0);
  const Matrix& h = model.hamiltonian();
  const Matrix& c = model.collapse();
  const double lambda = model.lambda();

  auto rhs = [&](const Matrix& rho) -> Matrix {
    return -im * (h * rho - rho * h) +
           lambda * (c * rho * c.adjoint() - rho);
  };

  double min_spacing = grid.size() > 1 ? grid[1] - grid[0] : 1.0;
  for (std::size_t k = 2; k < grid.size(); ++k) {
    min_spacing = std::min(min_spacing, grid[k] - grid[k - 1]);
  }
  const double h_max = std::min(min_spacing, 1e-3 / (1.0 + lambda));

  DensityPath path;
  path.grid = grid;
  path.rho.reserve(grid.size());
  path.trace.reserve(grid.size());

  Matrix rho = sigma;
  path.rho.push_back(rho);
  path.trace.push_back(rho.trace().real());

  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double span = grid[k] - grid[k - 1];
    const int n_sub = std::max(1, static_cast<int>(std::ceil(span / h_max)));
    const double dt = span / n_sub;
    for (int s = 0; s < n_sub; ++s) {
      const Matrix k1 = rhs(rho);
      const Matrix k2 = rhs(rho + 0.5 * dt * k1);
      const Matrix k3 = rhs(rho + 0.5 * dt * k2);
      const Matrix k4 = rhs(rho + dt * k3);
      rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (hermiticity_defect(rho) > 1e-8) {
      throw Error(ErrorCode::StepTooLarge,
                  "Hermiticity drift exceeded 1e-8 at t = " +
                      std::to_string(grid[k]));
    }
    path.rho.push_back(rho);
    path.trace.push_back(rho.trace().real());
  }
  return path;
}

DysonResult dyson_series(const ValidatedModel& model, const Matrix& sigma,
                         double t, double tol, int n_cap) {
  if (t < 0.0) throw std::invalid_argument("t must be nonnegative");
  if (tol <= 0.0) throw std::invalid_argument("tol must be positive");

  const int d = model.dim();
  const double lambda = model.lambda();

  if (t == 0.0) {
    return {sigma, 0, 0, 0.0};
  }

  // Truncation from the Poisson term bound (lambda t)^n / n! e^(-lambda t):
  // stop at the first order past the mode whose bound drops below tol;
  // everything beyond is dominated term by term.
  const double mu = lambda * t;
  int n_star = 0;
  double bound = std::exp(-mu);  // n = 0 term
  while (bound >= tol || static_cast<double>(n_star) < mu) {
    ++n_star;
    if (n_star > n_cap) {
      throw Error(ErrorCode::TruncationBudgetExceeded,
                  "Dyson series needs more than " + std::to_string(n_cap) +
                      " terms");
    }
    bound *= mu / n_star;
  }
  const int top_order = n_star - 1;  // orders 0 .. top_order are summed

  // Interaction-picture collapse at time r: C~(r) = e^{iHr} C e^{-iHr}.
  auto rotated_collapse = [&](double r) -> Matrix {
    const Matrix u = model.free_propagator(-r);
    return u * model.collapse() * u.adjoint();
  };

  // Evaluate the summed simplex integrals on m nodes via the
  // partial-integral (spectral integration) matrix.
  auto evaluate = [&](int m) -> Matrix {
    const GaussLegendre rule = gauss_legendre(m, 0.0, t);
    const Eigen::MatrixXd partial = partial_integrals(rule, 0.0);

    std::vector<Matrix> c_at(m);
    for (int i = 0; i < m; ++i) c_at[i] = rotated_collapse(rule.nodes[i]);

    std::vector<Matrix> level(m, sigma);       // I_{n-1} at the nodes
    Matrix total = sigma;                      // I_n(t) summed over n
    std::vector<Matrix> integrand(m);
    for (int n = 1; n <= top_order; ++n) {
      for (int i = 0; i < m; ++i) {
        integrand[i] = c_at[i] * level[i] * c_at[i].adjoint();
      }
      // I_n at every node, and the full-interval value for the sum.
      std::vector<Matrix> next(m, Matrix::Zero(d, d));
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          next[i].noalias() += (lambda * partial(i, j)) * integrand[j];
        }
      }
      Matrix full = Matrix::Zero(d, d);
      for (int j = 0; j < m; ++j) {
        full.noalias() += (lambda * rule.weights[j]) * integrand[j];
      }
      total += full;
      level = std::move(next);
    }
    const Matrix frame = model.free_propagator(t);
    return std::exp(-mu) * frame * total * frame.adjoint();
  };

  // Refine the node count until two rules agree.
  static const int kNodeCounts[] = {16, 24, 32, 48, 64};
  Matrix rho = evaluate(kNodeCounts[0]);
  int used = kNodeCounts[0];
  for (std::size_t s = 1; s < std::size(kNodeCounts); ++s) {
    const Matrix refined = evaluate(kNodeCounts[s]);
    const double diff = spectral_norm(refined - rho);
    rho = refined;
    used = kNodeCounts[s];
    if (diff <= tol / 10.0) break;
  }
  return {rho, top_order, used, bound};
}

DensityPath contraction_semigroup(const ValidatedModel& model,
                                  const Matrix& sigma,
                                  const std::vector<double>& grid) {
  check_master_grid(grid);
  const Matrix k_op = limit_generator(model);

  DensityPath path;
  path.grid = grid;
  path.rho.reserve(grid.size());
  path.trace.reserve(grid.size());
  for (double t : grid) {
    const Matrix v = expm(-t * k_op);
    Matrix rho = v * sigma * v.adjoint();
    path.rho.push_back(rho);
    path.trace.push_back(rho.trace().real());
  }
  return path;
}

}  // namespace qcollapse
