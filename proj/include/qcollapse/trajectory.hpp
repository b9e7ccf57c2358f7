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
#include <optional>

#include "qcollapse/model.hpp"
#include "qcollapse/types.hpp"

namespace qcollapse {

/// One realization of the Poisson counting trajectory on [0, t_max).
struct JumpRecord {
  double t_max = 0.0;
  std::vector<double> times;  // strictly increasing, in [0, t_max)
  double lambda = 0.0;
  std::uint64_t seed = 0;

  /// Number of events strictly before t.
  int count_before(double t) const;
};

/// Pure-state path along one counting trajectory.  The conditional state
/// eta is present exactly where the survival q stays above kQFloor.
struct TrajectoryPath {
  std::vector<double> grid;
  std::vector<Vector> chi;   // unnormalized states, chi[0] = eta0
  std::vector<double> q;     // survival, q[k] = ||chi[k]||^2
  std::vector<std::optional<Vector>> eta;  // normalized conditional states
};

/// Ensemble statistics over independent trajectories.
struct EnsembleResult {
  DensityPath rho_bar;
  std::vector<double> q_mean;
  std::vector<double> q_stderr;
};

/// Exponential inter-arrival sampling of the Poisson law; reproducible
/// from (lambda, t_max, seed).
JumpRecord sample_jumps(double lambda, double t_max, std::uint64_t seed);

/// The finite product exp(-iH (t - t_n)) C ... C exp(-iH t_1) over the
/// jumps before t.
Matrix propagator_at(const ValidatedModel& model, const JumpRecord& jumps,
                     double t);

/// Propagate a normalized pure state through the jump dynamics.  Exact
/// between jumps (cached eigenbasis exponential); C applies with the
/// forward-increment convention, so a grid point at a jump time records
/// the pre-jump value.
TrajectoryPath evolve_state(const ValidatedModel& model,
                            const JumpRecord& jumps, const Vector& eta0,
                            const std::vector<double>& grid);

/// Density-matrix version: von Neumann flow between jumps, rho -> C rho C^dag
/// at each jump.
DensityPath evolve_density(const ValidatedModel& model, const JumpRecord& jumps,
                           const Matrix& sigma, const std::vector<double>& grid);

/// Average N independent trajectories (seed = seed_base + index).  The
/// reduction is block-deterministic: output bits do not depend on the
/// worker count.
EnsembleResult ensemble_average(const ValidatedModel& model, const Vector& eta0,
                                int n_trajectories,
                                const std::vector<double>& grid,
                                std::uint64_t seed_base, unsigned workers = 0);

/// Uniform grid helper: n_steps+1 points from 0 to t_max.
std::vector<double> uniform_grid(double t_max, int n_steps);

}  // namespace qcollapse
