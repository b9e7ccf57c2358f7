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

#include "qcollapse/rng.hpp"
#include "qcollapse/types.hpp"

namespace qcollapse {

/// Matrix exponential by Pade(13) with scaling and squaring.
Matrix expm(const Matrix& a);

/// Hermitian PSD square root via eigendecomposition.  Eigenvalues in
/// [-kTolPsd, 0) are clipped to zero; anything lower throws TooNegative.
Matrix psd_sqrt(const Matrix& a);

/// Largest singular value.
double spectral_norm(const Matrix& a);

/// Hermiticity defect ||A - A^dag|| in spectral norm.
double hermiticity_defect(const Matrix& a);

/// Smallest eigenvalue of the Hermitian part of a (a must be Hermitian
/// up to roundoff for the result to mean anything).
double min_eigenvalue(const Matrix& a);

/// Trace distance (1/2)||a - b||_1 between Hermitian matrices.
double trace_distance(const Matrix& a, const Matrix& b);

/// Uniformly random entries on the complex unit square, via the given stream.
Matrix random_matrix(int dim, Philox& rng);

/// Random strict contraction: a random matrix rescaled below unit
/// spectral norm by the given margin in (0, 1).
Matrix random_contraction(int dim, Philox& rng, double margin = 0.1);

/// Random Hermitian PSD matrix M M^dag, normalized to unit spectral norm.
Matrix random_hermitian_psd(int dim, Philox& rng);

/// Random normalized state vector.
Vector random_state(int dim, Philox& rng);

}  // namespace qcollapse
