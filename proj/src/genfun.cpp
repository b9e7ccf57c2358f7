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

#include "qcollapse/genfun.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "qcollapse/linalg.hpp"
#include "qcollapse/parallel.hpp"
#include "qcollapse/rng.hpp"

namespace qcollapse {

TestFunction::TestFunction(std::vector<double> grid,
                           std::vector<Complex> values, double lambda_ref)
    : grid_(std::move(grid)), values_(std::move(values)),
      lambda_ref_(lambda_ref) {
  if (lambda_ref_ <= 0.0) {
    throw Error(ErrorCode::InadmissibleTestFunction,
                "test function needs lambda_ref > 0");
  }
  if (grid_.size() < 2 || values_.size() != grid_.size() - 1) {
    throw Error(ErrorCode::GridMismatch,
                "test function needs n+1 grid points for n cells");
  }
  if (grid_.front() != 0.0) {
    throw Error(ErrorCode::GridMismatch, "test-function grid must start at 0");
  }
  for (std::size_t k = 1; k < grid_.size(); ++k) {
    if (grid_[k] <= grid_[k - 1]) {
      throw Error(ErrorCode::GridMismatch,
                  "test-function grid must be strictly increasing");
    }
  }
  const double root = std::sqrt(lambda_ref_);
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (std::abs(1.0 + values_[k] / root) > 1.0 + 1e-12) {
      throw Error(ErrorCode::InadmissibleTestFunction,
                  "cell " + std::to_string(k) +
                      ": |1 + f/sqrt(lambda)| exceeds 1");
    }
  }
}

TestFunction TestFunction::zero(double t_max, double lambda_ref) {
  return TestFunction({0.0, t_max}, {Complex(0.0, 0.0)}, lambda_ref);
}

TestFunction TestFunction::constant(Complex value, double t_max,
                                    double lambda_ref) {
  return TestFunction({0.0, t_max}, {value}, lambda_ref);
}

Complex TestFunction::value_at(double t) const {
  if (t < grid_.front() || t >= grid_.back()) return Complex(0.0, 0.0);
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
  const std::size_t cell = static_cast<std::size_t>(it - grid_.begin()) - 1;
  return values_[cell];
}

Complex TestFunction::integral(double t) const {
  Complex acc(0.0, 0.0);
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (t <= grid_[k]) break;
    const double hi = std::min(t, grid_[k + 1]);
    acc += values_[k] * (hi - grid_[k]);
  }
  return acc;
}

Complex TestFunction::product_integral(const TestFunction& other,
                                       double t) const {
  if (grid_ != other.grid_) {
    throw Error(ErrorCode::GridMismatch, "test-function grids differ");
  }
  Complex acc(0.0, 0.0);
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (t <= grid_[k]) break;
    const double hi = std::min(t, grid_[k + 1]);
    acc += values_[k] * other.values_[k] * (hi - grid_[k]);
  }
  return acc;
}

double TestFunction::max_abs() const {
  double m = 0.0;
  for (const Complex& v : values_) m = std::max(m, std::abs(v));
  return m;
}

TestFunction TestFunction::conjugated() const {
  std::vector<Complex> conj(values_.size());
  std::transform(values_.begin(), values_.end(), conj.begin(),
                 [](const Complex& z) { return std::conj(z); });
  return TestFunction(grid_, std::move(conj), lambda_ref_);
}

TestFunction dot_plus(const TestFunction& f, const TestFunction& g) {
  if (f.grid() != g.grid()) {
    throw Error(ErrorCode::GridMismatch, "dot_plus needs a shared grid");
  }
  if (f.lambda_ref() != g.lambda_ref()) {
    throw Error(ErrorCode::LambdaMismatch, "dot_plus needs a shared lambda");
  }
  const double root = std::sqrt(f.lambda_ref());
  std::vector<Complex> values(f.values().size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    values[k] = f.values()[k] + g.values()[k] +
                f.values()[k] * g.values()[k] / root;
  }
  return TestFunction(f.grid(), std::move(values), f.lambda_ref());
}

Complex stochastic_exponent(const TestFunction& f, const JumpRecord& jumps,
                            double t) {
  if (f.lambda_ref() != jumps.lambda) {
    throw Error(ErrorCode::LambdaMismatch,
                "test function and trajectory disagree on lambda");
  }
  const double root = std::sqrt(f.lambda_ref());
  Complex value = std::exp(-root * f.integral(t));
  for (double r : jumps.times) {
    if (r >= t) break;
    value *= 1.0 + f.value_at(r) / root;
  }
  return value;
}

namespace {

/// Breakpoints for the generating-functional ODE: the output grid merged
/// with the cell boundaries of f, so RK4 never steps across a
/// discontinuity of the generator.
std::vector<double> merged_breakpoints(const std::vector<double>& grid,
                                       const TestFunction& f) {
  std::set<double> points(grid.begin(), grid.end());
  for (double b : f.grid()) {
    if (b > 0.0 && b < grid.back()) points.insert(b);
  }
  return {points.begin(), points.end()};
}

template <typename State>
std::vector<State> integrate_genfun(const ValidatedModel& model,
                                    const TestFunction& f, const State& start,
                                    const std::vector<double>& grid) {
  if (grid.empty() || grid.front() != 0.0) {
    throw std::invalid_argument("grid must start at 0");
  }
  const Complex im(0.0, 1.0);
  const Matrix ident = Matrix::Identity(model.dim(), model.dim());
  const Matrix defect = ident - model.collapse();  // I - C
  const double lambda = model.lambda();
  const double root = std::sqrt(lambda);

  // Step bound: accuracy for moderate generators, stability for stiff ones.
  const double gen_bound = lambda * spectral_norm(defect) *
                               (1.0 + f.max_abs() / root) +
                           spectral_norm(model.hamiltonian());
  const double h_max = std::min(1e-3, 0.05 / std::max(1.0, gen_bound));

  std::vector<State> out;
  out.reserve(grid.size());
  State state = start;
  out.push_back(state);

  const std::vector<double> breaks = merged_breakpoints(grid, f);
  std::size_t next_output = 1;
  for (std::size_t b = 1; b < breaks.size(); ++b) {
    const double lo = breaks[b - 1];
    const double hi = breaks[b];
    // f is constant on [lo, hi), so the generator is too.
    const Complex scale = lambda * (1.0 + f.value_at(lo) / root);
    auto apply = [&](const State& s) -> State {
      return -(im * (model.hamiltonian() * s) + scale * (defect * s));
    };
    const int n_sub =
        std::max(1, static_cast<int>(std::ceil((hi - lo) / h_max)));
    const double dt = (hi - lo) / n_sub;
    for (int s = 0; s < n_sub; ++s) {
      const State k1 = apply(state);
      const State k2 = apply(state + 0.5 * dt * k1);
      const State k3 = apply(state + 0.5 * dt * k2);
      const State k4 = apply(state + dt * k3);
      state += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (next_output < grid.size() && grid[next_output] == hi) {
      out.push_back(state);
      ++next_output;
    }
  }
  return out;
}

}  // namespace

std::vector<Matrix> breve_propagator(const ValidatedModel& model,
                                     const TestFunction& f,
                                     const std::vector<double>& grid) {
  const Matrix ident = Matrix::Identity(model.dim(), model.dim());
  return integrate_genfun<Matrix>(model, f, ident, grid);
}

std::vector<Vector> genfun_ode(const ValidatedModel& model,
                               const TestFunction& f, const Vector& eta0,
                               const std::vector<double>& grid) {
  return integrate_genfun<Vector>(model, f, eta0, grid);
}

McVector genfun_mc(const ValidatedModel& model, const TestFunction& f,
                   const Vector& eta0, int n_trajectories, double t,
                   std::uint64_t seed_base, unsigned workers) {
  if (n_trajectories < 1) {
    throw std::invalid_argument("need at least one trajectory");
  }
  const std::size_t n = static_cast<std::size_t>(n_trajectories);
  const std::size_t n_blocks = (n + kReductionBlock - 1) / kReductionBlock;
  const int d = model.dim();
  const std::vector<double> grid = {0.0, t};

  struct BlockSums {
    Vector sum;
    double sq = 0.0;
  };
  std::vector<BlockSums> blocks(n_blocks);

  parallel_blocks(n_blocks, workers, [&](std::size_t b) {
    BlockSums& sums = blocks[b];
    sums.sum = Vector::Zero(d);
    const std::size_t lo = b * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      const JumpRecord jumps = sample_jumps(model.lambda(), t, seed_base + i);
      const TrajectoryPath path = evolve_state(model, jumps, eta0, grid);
      const Complex eps = stochastic_exponent(f, jumps, t);
      const Vector sample = eps * path.chi.back();
      sums.sum += sample;
      sums.sq += sample.squaredNorm();
    }
  });

  Vector total = Vector::Zero(d);
  double total_sq = 0.0;
  for (const BlockSums& b : blocks) {
    total += b.sum;
    total_sq += b.sq;
  }

  McVector result;
  const double dn = static_cast<double>(n);
  result.mean = total / dn;
  if (n > 1) {
    const double var = std::max(
        0.0, (total_sq - dn * result.mean.squaredNorm()) / (dn - 1.0));
    result.stderr = std::sqrt(var / dn);
  }
  return result;
}

namespace {

McScalar mc_scalar(int n_trajectories, double t, double lambda,
                   std::uint64_t seed_base, unsigned workers,
                   const std::function<Complex(const JumpRecord&)>& sample) {
  const std::size_t n = static_cast<std::size_t>(n_trajectories);
  const std::size_t n_blocks = (n + kReductionBlock - 1) / kReductionBlock;

  struct BlockSums {
    Complex sum{0.0, 0.0};
    double sq = 0.0;
  };
  std::vector<BlockSums> blocks(n_blocks);

  parallel_blocks(n_blocks, workers, [&](std::size_t b) {
    const std::size_t lo = b * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      const JumpRecord jumps = sample_jumps(lambda, t, seed_base + i);
      const Complex z = sample(jumps);
      blocks[b].sum += z;
      blocks[b].sq += std::norm(z);
    }
  });

  Complex total(0.0, 0.0);
  double total_sq = 0.0;
  for (const BlockSums& b : blocks) {
    total += b.sum;
    total_sq += b.sq;
  }

  McScalar result;
  const double dn = static_cast<double>(n);
  result.mean = total / dn;
  if (n > 1) {
    const double var =
        std::max(0.0, (total_sq - dn * std::norm(result.mean)) / (dn - 1.0));
    result.stderr = std::sqrt(var / dn);
  }
  return result;
}

}  // namespace

McScalar mc_exponent_mean(const TestFunction& f, int n_trajectories, double t,
                          std::uint64_t seed_base, unsigned workers) {
  return mc_scalar(n_trajectories, t, f.lambda_ref(), seed_base, workers,
                   [&](const JumpRecord& jumps) {
                     return stochastic_exponent(f, jumps, t);
                   });
}

McScalar mc_exponent_pair_mean(const TestFunction& f, const TestFunction& g,
                               int n_trajectories, double t,
                               std::uint64_t seed_base, unsigned workers) {
  if (f.lambda_ref() != g.lambda_ref()) {
    throw Error(ErrorCode::LambdaMismatch, "pair mean needs a shared lambda");
  }
  return mc_scalar(n_trajectories, t, f.lambda_ref(), seed_base, workers,
                   [&](const JumpRecord& jumps) {
                     return stochastic_exponent(f, jumps, t) *
                            stochastic_exponent(g, jumps, t);
                   });
}

Vector tilde_kernel(const ValidatedModel& model, const Vector& eta,
                    const std::vector<double>& tuple, double t) {
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (tuple[i] < 0.0 || tuple[i] >= t) {
      throw Error(ErrorCode::UnorderedTuple, "tuple must lie in [0, t)");
    }
    if (i > 0 && tuple[i] <= tuple[i - 1]) {
      throw Error(ErrorCode::UnorderedTuple,
                  "tuple must be strictly increasing");
    }
  }

  const Matrix k_op = semigroup_generator(model);
  const Matrix defect =
      model.collapse() - Matrix::Identity(model.dim(), model.dim());

  Vector v = eta;
  double cursor = 0.0;
  for (double r : tuple) {
    v = expm(-(r - cursor) * k_op) * v;
    v = defect * v;
    cursor = r;
  }
  return expm(-(t - cursor) * k_op) * v;
}

std::vector<std::vector<int>> nondecreasing_tuples(int m, int n) {
  std::vector<std::vector<int>> out;
  if (n == 0) {
    out.push_back({});
    return out;
  }
  std::vector<int> tuple(n, 0);
  while (true) {
    out.push_back(tuple);
    int pos = n - 1;
    while (pos >= 0 && tuple[pos] == m - 1) --pos;
    if (pos < 0) break;
    const int next = tuple[pos] + 1;
    for (int k = pos; k < n; ++k) tuple[k] = next;
  }
  return out;
}

namespace {

std::uint64_t tuple_key(const std::vector<int>& tuple) {
  std::uint64_t key = 0;
  for (int idx : tuple) key = key * 64 + static_cast<std::uint64_t>(idx) + 1;
  return key;
}

}  // namespace

KernelTable model_kernel_table(const ValidatedModel& model, const Vector& eta,
                               double t, int max_order, int nodes) {
  if (max_order > 4) {
    throw std::invalid_argument("kernel tables are truncated at order 4");
  }
  if (nodes > 64) {
    throw std::invalid_argument("kernel tables allow at most 64 nodes");
  }
  KernelTable table;
  table.max_order = max_order;
  table.t = t;
  table.rule = gauss_legendre(nodes, 0.0, t);
  table.values.resize(max_order + 1);

  const Matrix k_op = semigroup_generator(model);
  const Matrix defect =
      model.collapse() - Matrix::Identity(model.dim(), model.dim());

  // Semigroup factors between nodes recur constantly; cache them by
  // node-index gap.  Index -1 stands for the origin, `nodes` for t.
  std::map<std::pair<int, int>, Matrix> propagators;
  auto segment = [&](int from, int to) -> const Matrix& {
    auto it = propagators.find({from, to});
    if (it == propagators.end()) {
      const double lo = from < 0 ? 0.0 : table.rule.nodes[from];
      const double hi = to == nodes ? t : table.rule.nodes[to];
      it = propagators.emplace(std::make_pair(from, to), expm(-(hi - lo) * k_op))
               .first;
    }
    return it->second;
  };

  for (int n = 0; n <= max_order; ++n) {
    const auto tuples = nondecreasing_tuples(nodes, n);
    table.values[n].reserve(tuples.size());
    for (const auto& tuple : tuples) {
      Vector v = eta;
      int cursor = -1;
      for (int idx : tuple) {
        v = segment(cursor, idx) * v;
        v = defect * v;
        cursor = idx;
      }
      v = segment(cursor, nodes) * v;
      table.values[n].push_back(std::move(v));
    }
  }
  return table;
}

KernelTable exponential_kernel_table(const TestFunction& g, double t,
                                     int max_order, int nodes,
                                     const Vector& direction) {
  if (max_order > 4) {
    throw std::invalid_argument("kernel tables are truncated at order 4");
  }
  KernelTable table;
  table.max_order = max_order;
  table.t = t;
  table.rule = gauss_legendre(nodes, 0.0, t);
  table.values.resize(max_order + 1);

  for (int n = 0; n <= max_order; ++n) {
    const auto tuples = nondecreasing_tuples(nodes, n);
    table.values[n].reserve(tuples.size());
    for (const auto& tuple : tuples) {
      Complex weight(1.0, 0.0);
      for (int idx : tuple) weight *= g.value_at(table.rule.nodes[idx]);
      table.values[n].push_back(weight * direction);
    }
  }
  return table;
}

KernelInnerProduct kernel_inner_product(const KernelTable& phi,
                                        const KernelTable& chi, int n_max) {
  if (n_max > 4) {
    throw std::invalid_argument("inner product truncates at order 4");
  }
  if (n_max > phi.max_order || n_max > chi.max_order) {
    throw std::invalid_argument("tables shallower than requested order");
  }
  if (phi.t != chi.t ||
      phi.rule.nodes.size() != chi.rule.nodes.size()) {
    throw Error(ErrorCode::GridMismatch,
                "kernel tables need a shared quadrature grid");
  }

  const int m = static_cast<int>(phi.rule.nodes.size());

  KernelInnerProduct out;
  out.value = Complex(0.0, 0.0);
  Complex last_term(0.0, 0.0);

  for (int n = 0; n <= n_max; ++n) {
    // Rank lookup for sorted tuples of this order.
    const auto tuples = nondecreasing_tuples(m, n);
    std::map<std::uint64_t, std::size_t> rank;
    for (std::size_t i = 0; i < tuples.size(); ++i) {
      rank[tuple_key(tuples[i])] = i;
    }

    Complex term(0.0, 0.0);
    if (n == 0) {
      term = phi.values[0][0].dot(chi.values[0][0]);
    } else {
      // Symmetrized product quadrature over the cube, divided by n!.
      std::vector<int> idx(n, 0);
      std::vector<int> sorted(n);
      double factorial = 1.0;
      for (int k = 2; k <= n; ++k) factorial *= k;
      while (true) {
        double weight = 1.0;
        for (int k = 0; k < n; ++k) weight *= phi.rule.weights[idx[k]];
        sorted = idx;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t r = rank.at(tuple_key(sorted));
        term += (weight / factorial) *
                phi.values[n][r].dot(chi.values[n][r]);
        int pos = n - 1;
        while (pos >= 0 && idx[pos] == m - 1) {
          idx[pos] = 0;
          --pos;
        }
        if (pos < 0) break;
        ++idx[pos];
      }
    }
    out.value += term;
    last_term = term;
  }

  const double denom = std::abs(out.value);
  out.last_term_ratio = denom > 0.0 ? std::abs(last_term) / denom : 0.0;
  out.truncation_warning = out.last_term_ratio > 1e-3;
  return out;
}

}  // namespace qcollapse
