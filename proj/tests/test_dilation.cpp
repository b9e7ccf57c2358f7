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

#include "qcollapse/dilation.hpp"
#include "qcollapse/linalg.hpp"

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

ValidatedModel fixture() {
  ModelSpec spec;
  spec.dim = 2;
  spec.hamiltonian = sigma_z();
  spec.collapse = diag2(1.0, 0.8);
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

TEST_CASE("dilation of the identity swaps the meter") {
  const Matrix ident = Matrix::Identity(2, 2);
  const DilationMatrix dil = build_dilation(ident, DilationFlavor::kHermitian);
  CHECK(spectral_norm(dil.block(0, 0)) < 1e-14);
  CHECK(spectral_norm(dil.block(1, 1)) < 1e-14);
  CHECK(spectral_norm(dil.block(1, 0) - ident) < 1e-14);
  CHECK(spectral_norm(dil.block(0, 1) - ident) < 1e-14);
}

TEST_CASE("dilation of zero is the signed direct sum") {
  const Matrix zero = Matrix::Zero(2, 2);
  const Matrix ident = Matrix::Identity(2, 2);
  const DilationMatrix dil = build_dilation(zero, DilationFlavor::kHermitian);
  CHECK(spectral_norm(dil.block(0, 0) + ident) < 1e-14);
  CHECK(spectral_norm(dil.block(1, 1) - ident) < 1e-14);
  CHECK(spectral_norm(dil.block(0, 1)) < 1e-14);
}

TEST_CASE("dilations are unitary with valid intertwining") {
  Philox rng(101, 0);
  for (int rep = 0; rep < 12; ++rep) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 3);
    const Matrix c = random_contraction(d, rng, 0.1 + 0.5 * rng.next_double());
    for (DilationFlavor flavor :
         {DilationFlavor::kHermitian, DilationFlavor::kNonHermitian}) {
      const DilationMatrix dil = build_dilation(c, flavor);
      CHECK(dil.unitarity_defect <= 1e-12);
      CHECK(dil.intertwining_defect <= 1e-10);
      if (flavor == DilationFlavor::kHermitian) {
        CHECK(hermiticity_defect(dil.s) <= 1e-12);
        CHECK(spectral_norm(dil.block(1, 0) - c) == 0.0);
      } else {
        CHECK(spectral_norm(dil.block(0, 0) - c) == 0.0);
      }
    }
  }
}

TEST_CASE("non-contractions are rejected") {
  CHECK_THROWS_AS(build_dilation(diag2(1.0, 1.1), DilationFlavor::kHermitian),
                  Error);
}

TEST_CASE("free step without jumps is the identity for H = 0") {
  ModelSpec spec;
  spec.dim = 2;
  spec.hamiltonian = Matrix::Zero(2, 2);
  spec.collapse = diag2(1.0, 0.8);
  spec.lambda = 1.0;
  const ValidatedModel model(std::move(spec));
  const DilationMatrix dil =
      build_dilation(model.collapse(), DilationFlavor::kHermitian);
  const DilatedState start = DilatedState::initial(excited());
  const DilatedState after = dilated_step(dil, model, start, 0.7, false);
  CHECK((after.amp - start.amp).norm() == 0.0);
  CHECK(after.n_meters == 0);
  CHECK(after.t == doctest::Approx(0.7));
}

TEST_CASE("single jump readout reproduces the collapse map") {
  const ValidatedModel model = fixture();
  Philox rng(103, 0);
  const Vector eta = random_state(2, rng);

  for (DilationFlavor flavor :
       {DilationFlavor::kHermitian, DilationFlavor::kNonHermitian}) {
    const DilationMatrix dil = build_dilation(model.collapse(), flavor);
    const DilatedState start = DilatedState::initial(eta);
    const DilatedState jumped = dilated_step(dil, model, start, 0.0, true);
    CHECK(jumped.n_meters == 1);
    CHECK(jumped.amp.norm() == doctest::Approx(1.0).epsilon(1e-12));
    const Vector read = compress(jumped, dil.readout());
    CHECK((read - model.collapse() * eta).norm() <= 1e-13);
  }
}

TEST_CASE("two trivial-Hamiltonian jumps compress to C^2") {
  ModelSpec spec;
  spec.dim = 2;
  spec.hamiltonian = Matrix::Zero(2, 2);
  spec.collapse = diag2(1.0, 0.8);
  spec.lambda = 1.0;
  const ValidatedModel model(std::move(spec));
  const DilationMatrix dil =
      build_dilation(model.collapse(), DilationFlavor::kHermitian);
  Philox rng(107, 0);
  const Vector eta = random_state(2, rng);
  DilatedState state = DilatedState::initial(eta);
  state = dilated_step(dil, model, state, 0.3, true);
  state = dilated_step(dil, model, state, 0.4, true);
  const Vector read = compress(state, dil.readout());
  const Vector expected = model.collapse() * model.collapse() * eta;
  CHECK((read - expected).norm() <= 1e-13);
}

TEST_CASE("meter budget is enforced") {
  const ValidatedModel model = fixture();
  const DilationMatrix dil =
      build_dilation(model.collapse(), DilationFlavor::kHermitian);
  DilatedState state = DilatedState::initial(excited());
  for (int i = 0; i < kMeterCap; ++i) {
    state = dilated_step(dil, model, state, 0.0, true);
  }
  CHECK_THROWS_AS(dilated_step(dil, model, state, 0.0, true), Error);
}

TEST_CASE("compression identity against the trajectory propagator") {
  const ValidatedModel model = fixture();
  Philox rng(109, 0);
  std::uint64_t seed = 50000;
  int accepted = 0;
  while (accepted < 25) {
    const JumpRecord rec = sample_jumps(model.lambda(), 1.0, seed++);
    if (rec.times.size() > 6) continue;
    ++accepted;
    const Vector eta = random_state(2, rng);
    const Vector target = propagator_at(model, rec, 1.0) * eta;
    for (DilationFlavor flavor :
         {DilationFlavor::kHermitian, DilationFlavor::kNonHermitian}) {
      const DilationMatrix dil = build_dilation(model.collapse(), flavor);
      const DilatedState state = evolve_dilated(dil, model, rec, eta, 1.0);
      CHECK(state.amp.norm() == doctest::Approx(1.0).epsilon(1e-12));
      const Vector read = compress(state, dil.readout());
      CHECK((read - target).norm() <= 1e-12);
    }
  }
}

TEST_CASE("survival projection is monotone along the jump count") {
  const ValidatedModel model = fixture();
  const DilationMatrix dil =
      build_dilation(model.collapse(), DilationFlavor::kHermitian);
  const JumpRecord rec = manual_jumps({0.1, 0.3, 0.55, 0.8}, 1.0);
  DilatedState state = DilatedState::initial(excited());
  double cur = 0.0;
  double prev_q = 1.0;
  for (double tj : rec.times) {
    state = dilated_step(dil, model, state, tj - cur, true);
    cur = tj;
    const double q = compress(state, dil.readout()).squaredNorm();
    CHECK(q <= prev_q + 1e-12);
    prev_q = q;
  }
}

TEST_CASE("vacuum coherent elements solve the semigroup equation") {
  const ValidatedModel model = fixture();
  const DilationMatrix dil =
      build_dilation(model.collapse(), DilationFlavor::kNonHermitian);
  const TestFunction zero = TestFunction::zero(1.0, model.lambda());
  const std::vector<double> grid = uniform_grid(1.0, 4);
  const std::vector<Matrix> path =
      coherent_matrix_ode(model, dil, zero, zero, zero, zero, grid);
  // With S00 = C the vacuum generator is -(iH + lambda (I - C)).
  const Matrix k_op = semigroup_generator(model);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(spectral_norm(path[k] - expm(-grid[k] * k_op)) <= 1e-8);
  }
}

TEST_CASE("scalar embeddings recover the generating-functional flow") {
  const ValidatedModel model = fixture();
  const DilationMatrix dil =
      build_dilation(model.collapse(), DilationFlavor::kNonHermitian);
  const double t = 1.0;
  const TestFunction f =
      TestFunction::constant(Complex(-0.3, 0.0), t, model.lambda());
  const TestFunction g =
      TestFunction::constant(Complex(-0.5, 0.2), t, model.lambda());
  const TestFunction zero = TestFunction::zero(t, model.lambda());
  const std::vector<double> grid = uniform_grid(t, 5);

  const std::vector<Matrix> coherent =
      coherent_matrix_ode(model, dil, g, zero, f, zero, grid);
  const std::vector<Matrix> breve =
      breve_propagator(model, dot_plus(g.conjugated(), f), grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(spectral_norm(coherent[k] - breve[k]) <= 1e-8);
  }
}

TEST_CASE("lambda expansion residual scales as lambda^(-3/2)") {
  const Matrix rate = diag2(0.0, 0.36);
  const double r2 = expansion_residual(rate, 1e2);
  const double r3 = expansion_residual(rate, 1e3);
  const double ratio = r2 / r3;
  CHECK(ratio > 20.0);
  CHECK(ratio < 45.0);

  // Fitted constant stays bounded across the sweep.
  const double c2 = r2 * std::pow(1e2, 1.5);
  const double c3 = r3 * std::pow(1e3, 1.5);
  CHECK(std::abs(c2 - c3) / c2 < 0.2);
}

TEST_CASE("limiting coherent flow: trivial and scalar closed forms") {
  const Matrix h = sigma_z();
  const Matrix rate = diag2(0.0, 0.36);
  const TestFunction zero = TestFunction::zero(1.0, 1.0);
  const std::vector<double> grid = uniform_grid(1.0, 4);

  const std::vector<Matrix> path =
      limiting_coherent_ode(h, rate, zero, zero, grid);
  const Matrix k_op = rate + Complex(0, 1) * h;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(spectral_norm(path[k] - expm(-grid[k] * k_op)) <= 1e-8);
  }

  // d = 1, H = 0, R = r: dU/dt = (-r + sqrt(2r) phi) U.
  const double r = 0.5;
  const Complex phi(-0.4, 0.1);
  Matrix h1 = Matrix::Zero(1, 1);
  Matrix r1 = Matrix::Zero(1, 1);
  r1(0, 0) = r;
  const TestFunction f1 = TestFunction::constant(phi, 1.0, 1.0);
  const TestFunction g1 = TestFunction::zero(1.0, 1.0);
  const std::vector<Matrix> scalar =
      limiting_coherent_ode(h1, r1, g1, f1, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Complex expected =
        std::exp((-r + std::sqrt(2.0 * r) * phi) * grid[k]);
    CHECK(std::abs(scalar[k](0, 0) - expected) <= 1e-8);
  }
}

TEST_CASE("coherent elements converge to the limiting flow") {
  const Matrix h = sigma_z();
  const Matrix rate = diag2(0.0, 0.36);
  const std::vector<double> grid = uniform_grid(1.0, 5);
  const TestFunction f1_ref =
      TestFunction::constant(Complex(-0.4, 0.0), 1.0, 1.0);
  const TestFunction g1_ref =
      TestFunction::constant(Complex(-0.3, 0.1), 1.0, 1.0);
  const std::vector<Matrix> limit =
      limiting_coherent_ode(h, rate, g1_ref, f1_ref, grid);

  std::vector<double> errors;
  for (double lambda : {1e2, 1e3, 1e4}) {
    const ValidatedModel model = model_from_rate(h, rate, lambda);
    const DilationMatrix dil =
        build_dilation(model.collapse(), DilationFlavor::kNonHermitian);
    const TestFunction f1 =
        TestFunction::constant(Complex(-0.4, 0.0), 1.0, lambda);
    const TestFunction g1 =
        TestFunction::constant(Complex(-0.3, 0.1), 1.0, lambda);
    const TestFunction zero = TestFunction::zero(1.0, lambda);
    const std::vector<Matrix> path =
        coherent_matrix_ode(model, dil, zero, g1, zero, f1, grid);
    double err = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      err = std::max(err, spectral_norm(path[k] - limit[k]));
    }
    errors.push_back(err);
  }
  CHECK(errors[0] > errors[1]);
  CHECK(errors[1] > errors[2]);
}

TEST_CASE("mixed embeddings converge at the lambda^(-1/2) rate") {
  // With nonzero vacuum components the sqrt(lambda) generator terms no
  // longer cancel exactly, so the successive-lambda error ratios sit
  // within a factor 3 of sqrt(10) per decade.
  const Matrix h = sigma_z();
  const Matrix rate = diag2(0.0, 0.36);
  const std::vector<double> grid = uniform_grid(1.0, 5);
  const TestFunction f1_ref =
      TestFunction::constant(Complex(-0.4, 0.0), 1.0, 1.0);
  const TestFunction g1_ref =
      TestFunction::constant(Complex(-0.3, 0.1), 1.0, 1.0);
  const std::vector<Matrix> limit =
      limiting_coherent_ode(h, rate, g1_ref, f1_ref, grid);

  std::vector<double> errors;
  for (double lambda : {1e2, 1e3, 1e4}) {
    const ValidatedModel model = model_from_rate(h, rate, lambda);
    const DilationMatrix dil =
        build_dilation(model.collapse(), DilationFlavor::kNonHermitian);
    const TestFunction f0 =
        TestFunction::constant(Complex(-0.2, 0.0), 1.0, lambda);
    const TestFunction g0 =
        TestFunction::constant(Complex(-0.15, 0.0), 1.0, lambda);
    const TestFunction f1 =
        TestFunction::constant(Complex(-0.4, 0.0), 1.0, lambda);
    const TestFunction g1 =
        TestFunction::constant(Complex(-0.3, 0.1), 1.0, lambda);
    const std::vector<Matrix> path =
        coherent_matrix_ode(model, dil, g0, g1, f0, f1, grid);
    double err = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      err = std::max(err, spectral_norm(path[k] - limit[k]));
    }
    errors.push_back(err);
  }
  const double root10 = std::sqrt(10.0);
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double ratio = errors[i] / errors[i + 1];
    CHECK(ratio > root10 / 3.0);
    CHECK(ratio < 3.0 * root10);
  }
}
