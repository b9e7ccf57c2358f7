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

#include <cmath>

#include <doctest.h>

#include "qcollapse/linalg.hpp"
#include "qcollapse/trajectory.hpp"

using namespace qcollapse;

namespace {

Matrix sigma_z() {
  Matrix h(2, 2);
  h << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(-1, 0);
  return h;
}

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

ValidatedModel fixture(double lambda = 1.0) {
  ModelSpec spec;
  spec.dim = 2;
  spec.hamiltonian = sigma_z();
  spec.collapse = diag2(1.0, 0.8);
  spec.lambda = lambda;
  return ValidatedModel(std::move(spec));
}

ValidatedModel decay_fixture(double c = 0.8) {
  ModelSpec spec;
  spec.dim = 2;
  spec.hamiltonian = Matrix::Zero(2, 2);
  spec.collapse = diag2(1.0, c);
  spec.lambda = 1.0;
  return ValidatedModel(std::move(spec));
}

Vector excited() {
  Vector v(2);
  v << Complex(0, 0), Complex(1, 0);
  return v;
}

JumpRecord manual_jumps(std::vector<double> times, double t_max,
                        double lambda = 1.0) {
  JumpRecord rec;
  rec.t_max = t_max;
  rec.times = std::move(times);
  rec.lambda = lambda;
  return rec;
}

}  // namespace

TEST_CASE("sample_jumps basics") {
  CHECK(sample_jumps(0.0, 5.0, 1).times.empty());
  CHECK_THROWS_AS(sample_jumps(-1.0, 5.0, 1), Error);
  CHECK_THROWS_AS(sample_jumps(1.0, 0.0, 1), std::invalid_argument);

  const JumpRecord rec = sample_jumps(2.0, 3.0, 99);
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    CHECK(rec.times[i] >= 0.0);
    CHECK(rec.times[i] < 3.0);
    if (i > 0) CHECK(rec.times[i] > rec.times[i - 1]);
  }

  const JumpRecord again = sample_jumps(2.0, 3.0, 99);
  CHECK(rec.times == again.times);
  const JumpRecord other = sample_jumps(2.0, 3.0, 100);
  CHECK(rec.times != other.times);
}

TEST_CASE("poisson count statistics") {
  // P(n = 0) at lambda t = 1 and the mean at lambda t = 6.
  const int n_samples = 20000;
  int zeros = 0;
  double mean6 = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    if (sample_jumps(1.0, 1.0, 5000 + i).times.empty()) ++zeros;
    mean6 += static_cast<double>(sample_jumps(2.0, 3.0, 90000 + i).times.size());
  }
  const double p0 = std::exp(-1.0);
  const double sigma0 = std::sqrt(p0 * (1 - p0) / n_samples);
  CHECK(std::abs(static_cast<double>(zeros) / n_samples - p0) < 3.0 * sigma0);

  mean6 /= n_samples;
  const double sigma6 = std::sqrt(6.0 / n_samples);
  CHECK(std::abs(mean6 - 6.0) < 3.0 * sigma6);
}

TEST_CASE("propagator with no jumps is the free group") {
  const ValidatedModel model = fixture();
  const JumpRecord rec = manual_jumps({}, 2.0);
  CHECK(spectral_norm(propagator_at(model, rec, 1.3) -
                      model.free_propagator(1.3)) < 1e-14);
}

TEST_CASE("propagator with trivial Hamiltonian is a power of C") {
  const ValidatedModel model = decay_fixture();
  const JumpRecord rec = manual_jumps({0.3, 0.7}, 1.0);
  const Matrix c2 = model.collapse() * model.collapse();
  CHECK(spectral_norm(propagator_at(model, rec, 1.0) - c2) < 1e-14);
}

TEST_CASE("propagator factors as evolve-then-scatter") {
  const ValidatedModel model = fixture();
  const JumpRecord rec = manual_jumps({0.5}, 1.0);
  const Matrix expected = model.free_propagator(0.5) * model.collapse() *
                          model.free_propagator(0.5);
  CHECK(spectral_norm(propagator_at(model, rec, 1.0) - expected) < 1e-13);
}

TEST_CASE("evolve_state endpoint matches the propagator") {
  const ValidatedModel model = fixture();
  Philox rng(17, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const JumpRecord rec = sample_jumps(1.0, 1.0, 700 + rep);
    const Vector eta = random_state(2, rng);
    const TrajectoryPath path =
        evolve_state(model, rec, eta, uniform_grid(1.0, 5));
    const Vector expected = propagator_at(model, rec, 1.0) * eta;
    CHECK((path.chi.back() - expected).norm() <= 1e-12);
  }
}

TEST_CASE("isometric collapse keeps survival at one") {
  ModelSpec spec;
  spec.dim = 2;
  spec.hamiltonian = sigma_z();
  spec.collapse = Matrix::Identity(2, 2);
  spec.lambda = 3.0;
  const ValidatedModel model(std::move(spec));
  const JumpRecord rec = sample_jumps(3.0, 1.0, 12);
  const TrajectoryPath path =
      evolve_state(model, rec, excited(), uniform_grid(1.0, 10));
  for (double q : path.q) CHECK(q == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("scalar contraction gives q = c^(2n)") {
  const double c = 0.8;
  const ValidatedModel model = decay_fixture(c);
  const JumpRecord rec = manual_jumps({0.1, 0.25, 0.6}, 1.0);
  const TrajectoryPath path =
      evolve_state(model, rec, excited(), uniform_grid(1.0, 4));
  // Grid 0, 0.25, 0.5, 0.75, 1; jumps at 0.1, 0.25, 0.6.
  // A grid point at a jump time keeps the pre-jump value.
  CHECK(path.q[0] == doctest::Approx(1.0));
  CHECK(path.q[1] == doctest::Approx(std::pow(c, 2)));   // jump at 0.25 pending
  CHECK(path.q[2] == doctest::Approx(std::pow(c, 4)));
  CHECK(path.q[3] == doctest::Approx(std::pow(c, 6)));
  CHECK(path.q[4] == doctest::Approx(std::pow(c, 6)));
}

TEST_CASE("forward-increment semantics on a two-jump fixture") {
  const double c = 0.8;
  const ValidatedModel model = decay_fixture(c);
  const JumpRecord rec = manual_jumps({0.3, 0.7}, 1.0);
  const std::vector<double> grid = {0.0, 0.3, 0.31, 0.7, 0.71, 1.0};
  const TrajectoryPath path = evolve_state(model, rec, excited(), grid);
  CHECK(path.q[0] == doctest::Approx(1.0));
  CHECK(path.q[1] == doctest::Approx(1.0));              // left limit at 0.3
  CHECK(path.q[2] == doctest::Approx(std::pow(c, 2)));
  CHECK(path.q[3] == doctest::Approx(std::pow(c, 2)));   // left limit at 0.7
  CHECK(path.q[4] == doctest::Approx(std::pow(c, 4)));
  CHECK(path.q[5] == doctest::Approx(std::pow(c, 4)));
}

TEST_CASE("survival is pathwise monotone and eta unit-normalized") {
  const ValidatedModel model = fixture(2.0);
  for (int rep = 0; rep < 20; ++rep) {
    const JumpRecord rec = sample_jumps(2.0, 1.0, 3000 + rep);
    const TrajectoryPath path =
        evolve_state(model, rec, excited(), uniform_grid(1.0, 16));
    for (std::size_t k = 1; k < path.q.size(); ++k) {
      CHECK(path.q[k] <= path.q[k - 1] + 1e-12);
    }
    for (const auto& eta : path.eta) {
      REQUIRE(eta.has_value());
      CHECK(eta->norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("conditional state disappears below the survival floor") {
  const ValidatedModel model = decay_fixture(1e-4);
  const JumpRecord rec = manual_jumps({0.1, 0.2}, 1.0);
  const TrajectoryPath path =
      evolve_state(model, rec, excited(), {0.0, 0.5, 1.0});
  CHECK(path.q.back() == doctest::Approx(1e-16));
  CHECK(path.eta[0].has_value());
  CHECK_FALSE(path.eta[2].has_value());  // q = 1e-16 < floor
  CHECK(path.chi[2].norm() > 0.0);       // amplitude still recorded
}

TEST_CASE("counting increments are 0/1 on fine grids") {
  // Ito table realization: on a fine grid the per-cell increments of the
  // counting process are almost surely 0 or 1, and then (dn)^2 = dn.
  const int cells = 10000;
  bool all_binary = true;
  for (int rep = 0; rep < 100; ++rep) {
    const JumpRecord rec = sample_jumps(1.0, 1.0, 42000 + rep);
    for (int k = 0; k < cells && all_binary; ++k) {
      const double lo = static_cast<double>(k) / cells;
      const double hi = static_cast<double>(k + 1) / cells;
      const int dn = rec.count_before(hi) - rec.count_before(lo);
      if (dn != 0 && dn != 1) all_binary = false;
      CHECK(dn * dn == dn);
    }
  }
  CHECK(all_binary);
}

TEST_CASE("evolve_density matches the pure-state outer product") {
  const ValidatedModel model = fixture();
  Philox rng(23, 0);
  const std::vector<double> grid = uniform_grid(1.0, 8);
  for (int rep = 0; rep < 10; ++rep) {
    const JumpRecord rec = sample_jumps(1.0, 1.0, 800 + rep);
    const Vector eta = random_state(2, rng);
    const TrajectoryPath path = evolve_state(model, rec, eta, grid);
    const DensityPath dens =
        evolve_density(model, rec, eta * eta.adjoint(), grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Matrix outer = path.chi[k] * path.chi[k].adjoint();
      CHECK((outer - dens.rho[k]).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("density is constant without collapse or Hamiltonian") {
  ModelSpec spec;
  spec.dim = 2;
  spec.hamiltonian = Matrix::Zero(2, 2);
  spec.collapse = Matrix::Identity(2, 2);
  spec.lambda = 2.0;
  const ValidatedModel model(std::move(spec));
  const JumpRecord rec = sample_jumps(2.0, 1.0, 4);
  const Matrix sigma = diag2(0.25, 0.75);
  const DensityPath dens = evolve_density(model, rec, sigma, {0.0, 0.5, 1.0});
  for (const Matrix& rho : dens.rho) {
    CHECK(spectral_norm(rho - sigma) < 1e-14);
  }
}

TEST_CASE("a jump drops the trace by the defect expectation") {
  const ValidatedModel model = fixture();
  const JumpRecord rec = manual_jumps({0.5}, 1.0);
  const std::vector<double> grid = {0.0, 0.5, 0.500001, 1.0};
  Philox rng(29, 0);
  const Vector eta = random_state(2, rng);
  const DensityPath dens =
      evolve_density(model, rec, eta * eta.adjoint(), grid);
  const Matrix defect = Matrix::Identity(2, 2) -
                        model.collapse().adjoint() * model.collapse();
  const double expected_drop = (defect * dens.rho[1]).trace().real();
  CHECK(expected_drop >= 0.0);
  CHECK(dens.trace[1] - dens.trace[2] ==
        doctest::Approx(expected_drop).epsilon(1e-4));
}

TEST_CASE("ensemble of one reduces to the single trajectory") {
  const ValidatedModel model = fixture();
  const std::vector<double> grid = uniform_grid(1.0, 5);
  const EnsembleResult ens = ensemble_average(model, excited(), 1, grid, 31);
  const JumpRecord rec = sample_jumps(1.0, 1.0, 31);
  const TrajectoryPath path = evolve_state(model, rec, excited(), grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(ens.q_mean[k] == path.q[k]);
    CHECK(ens.q_stderr[k] == 0.0);
    const Matrix outer = path.chi[k] * path.chi[k].adjoint();
    CHECK(spectral_norm(ens.rho_bar.rho[k] - outer) == 0.0);
  }
}

TEST_CASE("ensemble output is bit-identical across worker counts") {
  const ValidatedModel model = fixture();
  const std::vector<double> grid = uniform_grid(1.0, 6);
  const EnsembleResult base =
      ensemble_average(model, excited(), 999, grid, 77, 1);
  for (unsigned workers : {2u, 3u, 8u}) {
    const EnsembleResult other =
        ensemble_average(model, excited(), 999, grid, 77, workers);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      CHECK(base.q_mean[k] == other.q_mean[k]);
      CHECK(base.q_stderr[k] == other.q_stderr[k]);
      CHECK((base.rho_bar.rho[k] - other.rho_bar.rho[k]).cwiseAbs().maxCoeff() ==
            0.0);
    }
  }
}

TEST_CASE("averaged survival matches the poisson generating function") {
  // E[c^(2n)] summed over the Poisson weights, evaluated by series.
  const double c = 0.8, lambda = 1.0, t = 1.0;
  double series = 0.0, term = std::exp(-lambda * t);
  for (int n = 0; n < 60; ++n) {
    series += term * std::pow(c * c, n);
    term *= lambda * t / (n + 1);
  }

  const ValidatedModel model = decay_fixture(c);
  const EnsembleResult ens =
      ensemble_average(model, excited(), 4000, {0.0, t}, 123);
  CHECK(std::abs(ens.q_mean.back() - series) < 3.0 * ens.q_stderr.back());
  // The series sums to the closed form exp(lambda t (c^2 - 1)).
  CHECK(series == doctest::Approx(std::exp(-0.36)).epsilon(1e-12));
}

TEST_CASE("single trajectories approach the deterministic semigroup") {
  const Matrix rate = diag2(0.0, 0.36);
  const Matrix h = sigma_z();
  const Vector eta = excited();
  const std::vector<double> grid = uniform_grid(1.0, 20);

  std::vector<double> errors;
  for (double lambda : {10.0, 100.0, 1000.0, 10000.0}) {
    const ValidatedModel model = model_from_rate(h, rate, lambda);
    const Matrix k_op = limit_generator(model);
    const JumpRecord rec = sample_jumps(lambda, 1.0, 2718);
    const TrajectoryPath path = evolve_state(model, rec, eta, grid);
    double sup = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      sup = std::max(sup,
                     (path.chi[k] - expm(-grid[k] * k_op) * eta).norm());
    }
    errors.push_back(sup);
  }
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    CHECK(errors[i] > errors[i + 1]);
    // lambda^(-1/2) scaling within a factor of 3 per x10 step.
    const double ratio = errors[i] / errors[i + 1];
    CHECK(ratio > std::sqrt(10.0) / 3.0);
    CHECK(ratio < 3.0 * std::sqrt(10.0));
  }
}

TEST_CASE("grid validation") {
  const ValidatedModel model = fixture();
  const JumpRecord rec = manual_jumps({}, 1.0);
  CHECK_THROWS_AS(evolve_state(model, rec, excited(), {0.5, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(evolve_state(model, rec, excited(), {0.0, 2.0}),
                  std::invalid_argument);
  Vector unnormalized(2);
  unnormalized << Complex(0, 0), Complex(2, 0);
  CHECK_THROWS_AS(evolve_state(model, rec, unnormalized, {0.0, 1.0}),
                  std::invalid_argument);
}
