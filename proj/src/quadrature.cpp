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

#include "qcollapse/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace qcollapse {

GaussLegendre gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("quadrature order must be >= 1");
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);

  // Newton iteration on P_n, symmetric roots on [-1, 1].
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);

    const double mid = 0.5 * (a + b);
    const double halfw = 0.5 * (b - a);
    rule.nodes[i] = mid - halfw * x;
    rule.nodes[n - 1 - i] = mid + halfw * x;
    rule.weights[i] = halfw * w;
    rule.weights[n - 1 - i] = halfw * w;
  }
  return rule;
}

Eigen::MatrixXd partial_integrals(const GaussLegendre& rule, double a) {
  const int n = static_cast<int>(rule.nodes.size());
  Eigen::MatrixXd p(n, n);

  // Barycentric weights of the node set.
  std::vector<double> bary(n, 1.0);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (k != j) bary[j] *= (rule.nodes[j] - rule.nodes[k]);
    }
    bary[j] = 1.0 / bary[j];
  }

  auto lagrange = [&](int j, double x) {
    double num = 1.0;
    for (int k = 0; k < n; ++k) {
      if (k != j) num *= (x - rule.nodes[k]);
    }
    return num * bary[j];
  };

  // n-point Gauss is exact for the degree-(n-1) basis polynomials.
  for (int i = 0; i < n; ++i) {
    const GaussLegendre sub = gauss_legendre(n, a, rule.nodes[i]);
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int q = 0; q < n; ++q) {
        acc += sub.weights[q] * lagrange(j, sub.nodes[q]);
      }
      p(i, j) = acc;
    }
  }
  return p;
}

}  // namespace qcollapse
