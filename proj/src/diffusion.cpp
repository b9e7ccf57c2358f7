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

#include "qcollapse/diffusion.hpp"

#include <cmath>
#include <limits>

#include "qcollapse/linalg.hpp"
#include "qcollapse/master.hpp"
#include "qcollapse/parallel.hpp"
#include "qcollapse/rng.hpp"
#include "qcollapse/trajectory.hpp"

namespace qcollapse {

namespace {

struct SchemeOperators {
  Matrix k_op;        // R + iH
  Matrix noise_root;  // (R + R^dag)^(1/2)
};

SchemeOperators scheme_operators(const Matrix& hamiltonian,
                                 const Matrix& rate) {
  if (hermiticity_defect(hamiltonian) > kTolHerm) {
    throw Error(ErrorCode::NotHermitian, "H is not Hermitian");
  }
  const Matrix dissipation = rate + rate.adjoint();
  if (min_eigenvalue(dissipation) < -kTolPsd) {
    throw Error(ErrorCode::NotDissipative, "R + R^dag must be PSD");
  }
  return {rate + Complex(0.0, 1.0) * hamiltonian, psd_sqrt(dissipation)};
}

int step_count(double dt, double t_max) {
  if (dt <= 0.0 || dt > 1e-3 + 1e-15) {
    throw std::invalid_argument("dt must lie in (0, 1e-3]");
  }
  if (t_max <= 0.0) throw std::invalid_argument("t_max must be positive");
  const int n = static_cast<int>(std::llround(t_max / dt));
  if (n < 1 || std::abs(n * dt - t_max) > 1e-9 * t_max) {
    throw std::invalid_argument("t_max must be an integer number of steps");
  }
  return n;
}

DiffusionPath run_em(const SchemeOperators& ops, const Vector& eta0, double dt,
                     const std::vector<double>& increments, bool renormalize,
                     std::uint64_t seed) {
  if (std::abs(eta0.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("initial state must be normalized");
  }
  const Complex im(0.0, 1.0);
  const int n = static_cast<int>(increments.size());

  DiffusionPath path;
  path.dt = dt;
  path.seed = seed;
  path.grid.resize(n + 1);
  path.psi.resize(n + 1);
  path.wiener = increments;

  Vector psi = eta0;
  path.grid[0] = 0.0;
  path.psi[0] = psi;
  for (int k = 0; k < n; ++k) {
    psi = psi - dt * (ops.k_op * psi) + im * increments[k] * (ops.noise_root * psi);
    if (renormalize) psi.normalize();
    path.grid[k + 1] = (k + 1) * dt;
    path.psi[k + 1] = psi;
  }
  return path;
}

}  // namespace

DiffusionPath integrate_ito_schrodinger(const Matrix& hamiltonian,
                                        const Matrix& rate, const Vector& eta0,
                                        double dt, double t_max,
                                        std::uint64_t seed, bool renormalize) {
  const SchemeOperators ops = scheme_operators(hamiltonian, rate);
  const int n = step_count(dt, t_max);
  const double root_dt = std::sqrt(dt);

  Philox rng(seed, kWienerStream);
  std::vector<double> increments(n);
  for (int k = 0; k < n; ++k) increments[k] = root_dt * rng.next_normal();

  return run_em(ops, eta0, dt, increments, renormalize, seed);
}

DiffusionPath integrate_ito_schrodinger_with_increments(
    const Matrix& hamiltonian, const Matrix& rate, const Vector& eta0,
    double dt, const std::vector<double>& increments, bool renormalize) {
  const SchemeOperators ops = scheme_operators(hamiltonian, rate);
  return run_em(ops, eta0, dt, increments, renormalize, 0);
}

DiffusionEnsemble diffusion_ensemble(const Matrix& hamiltonian,
                                     const Matrix& rate, const Vector& eta0,
                                     int n_paths, double dt, double t_max,
                                     std::uint64_t seed_base, int n_snapshots,
                                     unsigned workers) {
  if (n_paths < 1) throw std::invalid_argument("need at least one path");
  if (n_snapshots < 2) throw std::invalid_argument("need >= 2 snapshots");
  const SchemeOperators ops = scheme_operators(hamiltonian, rate);
  const int n_steps = step_count(dt, t_max);
  const int d = static_cast<int>(eta0.size());
  const Complex im(0.0, 1.0);
  const double root_dt = std::sqrt(dt);

  // Snapshot step indices, first = 0, last = n_steps.
  std::vector<int> snap(n_snapshots);
  for (int j = 0; j < n_snapshots; ++j) {
    snap[j] = static_cast<int>(
        std::llround(static_cast<double>(j) * n_steps / (n_snapshots - 1)));
  }

  const std::size_t n = static_cast<std::size_t>(n_paths);
  const std::size_t n_blocks = (n + kReductionBlock - 1) / kReductionBlock;

  struct BlockSums {
    std::vector<Vector> mean;
    std::vector<Matrix> moment;
    std::vector<double> norm_sq;   // per-sample ||psi||^2 accumulated
    std::vector<double> norm_4th;  // and its square, for the stderr
  };
  std::vector<BlockSums> blocks(n_blocks);

  parallel_blocks(n_blocks, workers, [&](std::size_t b) {
    BlockSums& sums = blocks[b];
    sums.mean.assign(n_snapshots, Vector::Zero(d));
    sums.moment.assign(n_snapshots, Matrix::Zero(d, d));
    sums.norm_sq.assign(n_snapshots, 0.0);
    sums.norm_4th.assign(n_snapshots, 0.0);
    const std::size_t lo = b * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      Philox rng(seed_base + i, kWienerStream);
      Vector psi = eta0;
      int next_snap = 0;
      for (int k = 0; k <= n_steps; ++k) {
        if (next_snap < n_snapshots && snap[next_snap] == k) {
          sums.mean[next_snap] += psi;
          sums.moment[next_snap].noalias() += psi * psi.adjoint();
          const double q = psi.squaredNorm();
          sums.norm_sq[next_snap] += q;
          sums.norm_4th[next_snap] += q * q;
          ++next_snap;
        }
        if (k == n_steps) break;
        const double dw = root_dt * rng.next_normal();
        psi = psi - dt * (ops.k_op * psi) + im * dw * (ops.noise_root * psi);
      }
    }
  });

  DiffusionEnsemble out;
  out.grid.resize(n_snapshots);
  for (int j = 0; j < n_snapshots; ++j) out.grid[j] = snap[j] * dt;
  out.mean.assign(n_snapshots, Vector::Zero(d));
  out.second_moment.assign(n_snapshots, Matrix::Zero(d, d));
  out.mean_stderr.assign(n_snapshots, 0.0);
  out.trace_stderr.assign(n_snapshots, 0.0);

  std::vector<double> norm4(n_snapshots, 0.0), norm2(n_snapshots, 0.0);
  for (const BlockSums& b : blocks) {
    for (int j = 0; j < n_snapshots; ++j) {
      out.mean[j] += b.mean[j];
      out.second_moment[j] += b.moment[j];
      norm2[j] += b.norm_sq[j];
      norm4[j] += b.norm_4th[j];
    }
  }

  const double dn = static_cast<double>(n);
  for (int j = 0; j < n_snapshots; ++j) {
    out.mean[j] /= dn;
    out.second_moment[j] /= dn;
    if (n > 1) {
      // Aggregate sample variance of psi around its mean.
      const double var_vec = std::max(
          0.0,
          (norm2[j] - dn * out.mean[j].squaredNorm()) / (dn - 1.0));
      out.mean_stderr[j] = std::sqrt(var_vec / dn);
      const double mean_q = norm2[j] / dn;
      const double var_q =
          std::max(0.0, (norm4[j] - dn * mean_q * mean_q) / (dn - 1.0));
      out.trace_stderr[j] = std::sqrt(var_q / dn);
    }
  }
  return out;
}

Vector em_discrete_mean(const Matrix& hamiltonian, const Matrix& rate,
                        const Vector& eta0, double dt, int n_steps) {
  const SchemeOperators ops = scheme_operators(hamiltonian, rate);
  const Matrix step =
      Matrix::Identity(eta0.size(), eta0.size()) - dt * ops.k_op;
  Vector psi = eta0;
  for (int k = 0; k < n_steps; ++k) psi = step * psi;
  return psi;
}

Matrix em_discrete_second_moment(const Matrix& hamiltonian, const Matrix& rate,
                                 const Matrix& sigma0, double dt, int n_steps) {
  const SchemeOperators ops = scheme_operators(hamiltonian, rate);
  const Matrix step =
      Matrix::Identity(sigma0.rows(), sigma0.cols()) - dt * ops.k_op;
  Matrix sigma = sigma0;
  for (int k = 0; k < n_steps; ++k) {
    sigma = step * sigma * step.adjoint() +
            dt * ops.noise_root * sigma * ops.noise_root;
  }
  return sigma;
}

std::vector<ZenoRow> zeno_sweep(const Matrix& hamiltonian, const Matrix& rate,
                                const std::vector<double>& lambdas,
                                const Vector& eta0, double t_max, int n_paths,
                                std::uint64_t seed_base, double dt, int n_grid,
                                unsigned workers) {
  const SchemeOperators ops = scheme_operators(hamiltonian, rate);
  const std::vector<double> grid = uniform_grid(t_max, n_grid - 1);
  const Matrix sigma = eta0 * eta0.adjoint();

  // Deterministic semigroup target exp(-Kt) sigma exp(-K^dag t).
  std::vector<Matrix> semigroup(grid.size());
  std::vector<Matrix> propagators(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    propagators[k] = expm(-grid[k] * ops.k_op);
    semigroup[k] = propagators[k] * sigma * propagators[k].adjoint();
  }

  // Diffusion-limit second moment at the endpoint.
  const DiffusionEnsemble diff =
      diffusion_ensemble(hamiltonian, rate, eta0, n_paths, dt, t_max,
                         seed_base, 2, workers);
  const Matrix& diff_moment = diff.second_moment.back();

  std::vector<ZenoRow> rows;
  for (double lambda : lambdas) {
    ZenoRow row;
    row.lambda = lambda;

    // Side condition R^dag R <= lambda (R + R^dag), equivalently the
    // derived collapse operator is a contraction.
    const Matrix gap =
        lambda * (rate + rate.adjoint()) - rate.adjoint() * rate;
    row.side_condition_ok = min_eigenvalue(gap) >= -kTolPsd * lambda;
    if (!row.side_condition_ok) {
      row.sup_state_error = std::nan("");
      row.dist_semigroup = std::nan("");
      row.dist_diffusion = std::nan("");
      rows.push_back(row);
      continue;
    }

    const ValidatedModel model = model_from_rate(hamiltonian, rate, lambda);

    // Single-trajectory pathwise distance, fixed seed shared by all rows.
    const JumpRecord jumps = sample_jumps(lambda, t_max, seed_base);
    const TrajectoryPath path = evolve_state(model, jumps, eta0, grid);
    double sup_err = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      sup_err = std::max(sup_err,
                         (path.chi[k] - propagators[k] * eta0).norm());
    }
    row.sup_state_error = sup_err;

    const EnsembleResult ens =
        ensemble_average(model, eta0, n_paths, grid, seed_base, workers);
    double dist_semi = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      dist_semi =
          std::max(dist_semi, trace_distance(ens.rho_bar.rho[k], semigroup[k]));
    }
    row.dist_semigroup = dist_semi;
    row.dist_diffusion =
        trace_distance(ens.rho_bar.rho.back(), diff_moment);
    rows.push_back(row);
  }

  ZenoRow limit_row;
  limit_row.lambda = std::numeric_limits<double>::infinity();
  limit_row.side_condition_ok = true;
  limit_row.sup_state_error = 0.0;
  limit_row.dist_semigroup = trace_distance(diff_moment, semigroup.back());
  limit_row.dist_diffusion = 0.0;
  rows.push_back(limit_row);
  return rows;
}

}  // namespace qcollapse
