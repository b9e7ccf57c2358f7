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

#include "qcollapse/model.hpp"
#include "qcollapse/types.hpp"

namespace qcollapse {

/// One Euler-Maruyama path of the Ito-Schrodinger equation on a uniform
/// step grid; increments are reproducible from the seed.
struct DiffusionPath {
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> grid;    // 0, dt, ..., n dt
  std::vector<Vector> psi;     // per grid point
  std::vector<double> wiener;  // increment per step (mean 0, variance dt)
};

/// Euler-Maruyama (Ito convention) for
///   d psi + (R + iH) psi dt = i (R + R^dag)^(1/2) psi dw .
/// No per-step renormalization unless asked: the norm drift is itself
/// the observable.  Throws NotDissipative when R + R^dag is indefinite.
DiffusionPath integrate_ito_schrodinger(const Matrix& hamiltonian,
                                        const Matrix& rate, const Vector& eta0,
                                        double dt, double t_max,
                                        std::uint64_t seed,
                                        bool renormalize = false);

/// Same scheme driven by caller-supplied increments (e.g. a refinement
/// of a coarser run for step-coupling studies).
DiffusionPath integrate_ito_schrodinger_with_increments(
    const Matrix& hamiltonian, const Matrix& rate, const Vector& eta0,
    double dt, const std::vector<double>& increments, bool renormalize = false);

struct DiffusionEnsemble {
  std::vector<double> grid;            // snapshot times
  std::vector<Vector> mean;            // E[psi]
  std::vector<Matrix> second_moment;   // E[psi psi^dag]
  std::vector<double> mean_stderr;     // aggregate stderr of E[psi]
  std::vector<double> trace_stderr;    // stderr of E[||psi||^2]
};

/// Average N independent paths (seed = seed_base + index, Wiener stream).
/// Deterministic block reduction; snapshots at ~n_snapshots points.
DiffusionEnsemble diffusion_ensemble(const Matrix& hamiltonian,
                                     const Matrix& rate, const Vector& eta0,
                                     int n_paths, double dt, double t_max,
                                     std::uint64_t seed_base,
                                     int n_snapshots = 11,
                                     unsigned workers = 0);

/// Exact mean of the discrete scheme, E[psi_n] = (I - K dt)^n eta.
Vector em_discrete_mean(const Matrix& hamiltonian, const Matrix& rate,
                        const Vector& eta0, double dt, int n_steps);

/// Exact second moment of the discrete scheme:
///   S_{n+1} = (I - K dt) S_n (I - K dt)^dag + dt B S_n B .
Matrix em_discrete_second_moment(const Matrix& hamiltonian, const Matrix& rate,
                                 const Matrix& sigma0, double dt, int n_steps);

/// One row of the Zeno crossover table.  lambda = +inf marks the
/// diffusion-limit row.
struct ZenoRow {
  double lambda = 0.0;
  bool side_condition_ok = true;  // R^dag R <= lambda (R + R^dag)
  double sup_state_error = 0.0;   // sup_t ||chi_t - exp(-Kt) eta|| (1 traj)
  double dist_semigroup = 0.0;    // trace distance of rho_bar to exp(-Kt)...
  double dist_diffusion = 0.0;    // ... and to the diffusion second moment
};

/// Sweep the jump intensity with a fixed rate operator: for each lambda,
/// jump ensembles are compared against the contraction semigroup and the
/// diffusion-limit second moment; a final lambda = inf row carries the
/// diffusion-vs-semigroup distance.  A violated side condition flags the
/// row and skips its metrics instead of aborting.
std::vector<ZenoRow> zeno_sweep(const Matrix& hamiltonian, const Matrix& rate,
                                const std::vector<double>& lambdas,
                                const Vector& eta0, double t_max, int n_paths,
                                std::uint64_t seed_base, double dt = 1e-3,
                                int n_grid = 21, unsigned workers = 0);

}  // namespace qcollapse
