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

#include <cstddef>
#include <functional>

namespace qcollapse {

/// Trajectories are reduced in fixed-size blocks:  workers fill per-block
/// partial sums in any order, and the caller folds the blocks in index
/// order afterwards, so the result is bit-identical for any worker count.
inline constexpr std::size_t kReductionBlock = 64;

/// Resolve a worker count: explicit request > 0 wins, then the
/// QCOLLAPSE_WORKERS environment variable, then hardware concurrency.
unsigned resolve_workers(unsigned requested);

/// Run fn(block_index) for every block in [0, n_blocks) on the given
/// number of workers.  fn must only write to state owned by its block.
void parallel_blocks(std::size_t n_blocks, unsigned workers,
                     const std::function<void(std::size_t)>& fn);

}  // namespace qcollapse
