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

#include <vector>

#include <Eigen/Dense>

namespace qcollapse {

/// Gauss-Legendre rule on [a, b].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendre gauss_legendre(int n, double a, double b);

/// Partial-integral matrix over the rule's own nodes:
/// P(i, j) = integral over [a, nodes[i]] of the j-th Lagrange basis
/// polynomial.  Applying P to samples at the nodes integrates the
/// degree-(n-1) interpolant up to each node exactly.
Eigen::MatrixXd partial_integrals(const GaussLegendre& rule, double a);

}  // namespace qcollapse
