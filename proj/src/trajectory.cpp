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

#include "qcollapse/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "qcollapse/parallel.hpp"
#include "qcollapse/rng.hpp"

namespace qcollapse {

namespace {

void check_grid(const std::vector<double>& grid, double t_max) {
  if (grid.empty() || grid.front() != 0.0) {
    throw std::invalid_argument("grid must start at 0");
  }
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (grid[k] <= grid[k - 1]) {
      throw std::invalid_argument("grid must be strictly increasing");
    }
  }
  if (grid.back() > t_max + 1e-12) {
    throw std::invalid_argument("grid extends past t_max");
  }
}

void check_normalized(const Vector& eta0) {
  if (std::abs(eta0.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("initial state must be normalized");
  }
}

/// Walks grid points and jump times in merged order, calling free(dt)
/// for Hamiltonian legs, jump() at each collapse, and record(k) at every
/// grid point.  A jump exactly at a grid point lands after the record:
/// grid values are left limits.
template <typename Free, typename Jump, typename Record>
void walk(const std::vector<double>& grid, const std::vector<double>& times,
          Free&& free, Jump&& jump, Record&& record) {
  double cur = 0.0;
  std::size_t j = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double target = grid[k];
    while (j < times.size() && times[j] < target) {
      free(times[j] - cur);
      jump();
      cur = times[j];
      ++j;
    }
    free(target - cur);
    cur = target;
    record(k);
  }
}

}  // namespace

int JumpRecord::count_before(double t) const {
  return static_cast<int>(
      std::lower_bound(times.begin(), times.end(), t) - times.begin());
}

JumpRecord sample_jumps(double lambda, double t_max, std::uint64_t seed) {
  if (lambda < 0.0) {
    throw Error(ErrorCode::NegativeIntensity, "lambda must be nonnegative");
  }
  if (t_max <= 0.0) {
    throw std::invalid_argument("t_max must be positive");
  }
  JumpRecord rec;
  rec.t_max = t_max;
  rec.lambda = lambda;
  rec.seed = seed;
  if (lambda == 0.0) return rec;

  Philox rng(seed, kJumpStream);
  double t = rng.next_exponential(lambda);
  while (t < t_max) {
    rec.times.push_back(t);
    t += rng.next_exponential(lambda);
  }
  return rec;
}

Matrix propagator_at(const ValidatedModel& model, const JumpRecord& jumps,
                     double t) {
  if (t > jumps.t_max + 1e-12) {
    throw std::invalid_argument("t exceeds the sampled horizon");
  }
  Matrix v = Matrix::Identity(model.dim(), model.dim());
  double cur = 0.0;
  for (double tj : jumps.times) {
    if (tj >= t) break;
    v = model.collapse() * (model.free_propagator(tj - cur) * v);
    cur = tj;
  }
  return model.free_propagator(t - cur) * v;
}

TrajectoryPath evolve_state(const ValidatedModel& model,
                            const JumpRecord& jumps, const Vector& eta0,
                            const std::vector<double>& grid) {
  check_grid(grid, jumps.t_max);
  check_normalized(eta0);

  TrajectoryPath path;
  path.grid = grid;
  path.chi.resize(grid.size());
  path.q.resize(grid.size());
  path.eta.resize(grid.size());

  Vector state = eta0;
  walk(
      grid, jumps.times,
      [&](double dt) {
        if (dt > 0.0) state = model.free_propagator(dt) * state;
      },
      [&] { state = model.collapse() * state; },
      [&](std::size_t k) {
        path.chi[k] = state;
        const double q = state.squaredNorm();
        path.q[k] = q;
        if (q > kQFloor) {
          path.eta[k] = state / std::sqrt(q);
        }
      });
  return path;
}

DensityPath evolve_density(const ValidatedModel& model, const JumpRecord& jumps,
                           const Matrix& sigma,
                           const std::vector<double>& grid) {
  check_grid(grid, jumps.t_max);

  DensityPath path;
  path.grid = grid;
  path.rho.resize(grid.size());
  path.trace.resize(grid.size());

  Matrix rho = sigma;
  walk(
      grid, jumps.times,
      [&](double dt) {
        if (dt > 0.0) {
          const Matrix u = model.free_propagator(dt);
          rho = u * rho * u.adjoint();
        }
      },
      [&] { rho = model.collapse() * rho * model.collapse().adjoint(); },
      [&](std::size_t k) {
        path.rho[k] = rho;
        path.trace[k] = rho.trace().real();
      });
  return path;
}

EnsembleResult ensemble_average(const ValidatedModel& model, const Vector& eta0,
                                int n_trajectories,
                                const std::vector<double>& grid,
                                std::uint64_t seed_base, unsigned workers) {
  if (n_trajectories < 1) {
    throw std::invalid_argument("need at least one trajectory");
  }
  const std::size_t n = static_cast<std::size_t>(n_trajectories);
  const std::size_t n_grid = grid.size();
  const std::size_t n_blocks = (n + kReductionBlock - 1) / kReductionBlock;
  const int d = model.dim();

  struct BlockSums {
    std::vector<Matrix> rho;
    std::vector<double> q;
    std::vector<double> q2;
  };
  std::vector<BlockSums> blocks(n_blocks);

  parallel_blocks(n_blocks, workers, [&](std::size_t b) {
    BlockSums& sums = blocks[b];
    sums.rho.assign(n_grid, Matrix::Zero(d, d));
    sums.q.assign(n_grid, 0.0);
    sums.q2.assign(n_grid, 0.0);
    const std::size_t lo = b * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      const JumpRecord jumps =
          sample_jumps(model.lambda(), grid.back(), seed_base + i);
      const TrajectoryPath path = evolve_state(model, jumps, eta0, grid);
      for (std::size_t k = 0; k < n_grid; ++k) {
        sums.rho[k].noalias() += path.chi[k] * path.chi[k].adjoint();
        sums.q[k] += path.q[k];
        sums.q2[k] += path.q[k] * path.q[k];
      }
    }
  });

  EnsembleResult result;
  result.rho_bar.grid = grid;
  result.rho_bar.rho.assign(n_grid, Matrix::Zero(d, d));
  result.rho_bar.trace.assign(n_grid, 0.0);
  result.q_mean.assign(n_grid, 0.0);
  result.q_stderr.assign(n_grid, 0.0);

  std::vector<double> q2(n_grid, 0.0);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    for (std::size_t k = 0; k < n_grid; ++k) {
      result.rho_bar.rho[k] += blocks[b].rho[k];
      result.q_mean[k] += blocks[b].q[k];
      q2[k] += blocks[b].q2[k];
    }
  }

  const double dn = static_cast<double>(n);
  for (std::size_t k = 0; k < n_grid; ++k) {
    result.rho_bar.rho[k] /= dn;
    result.rho_bar.trace[k] = result.rho_bar.rho[k].trace().real();
    result.q_mean[k] /= dn;
    if (n > 1) {
      const double var =
          std::max(0.0, (q2[k] - dn * result.q_mean[k] * result.q_mean[k]) /
                            (dn - 1.0));
      result.q_stderr[k] = std::sqrt(var / dn);
    }
  }
  return result;
}

std::vector<double> uniform_grid(double t_max, int n_steps) {
  if (n_steps < 1 || t_max <= 0.0) {
    throw std::invalid_argument("uniform_grid needs t_max > 0, n_steps >= 1");
  }
  std::vector<double> grid(n_steps + 1);
  for (int k = 0; k <= n_steps; ++k) {
    grid[k] = t_max * static_cast<double>(k) / n_steps;
  }
  grid.back() = t_max;
  return grid;
}

}  // namespace qcollapse
