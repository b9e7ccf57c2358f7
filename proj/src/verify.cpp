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

#include "qcollapse/verify.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "qcollapse/diffusion.hpp"
#include "qcollapse/dilation.hpp"
#include "qcollapse/genfun.hpp"
#include "qcollapse/linalg.hpp"
#include "qcollapse/master.hpp"
#include "qcollapse/parallel.hpp"
#include "qcollapse/rng.hpp"
#include "qcollapse/trajectory.hpp"

namespace qcollapse::verify {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(const Clock::time_point& start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(3);
  out << x;
  return out.str();
}

Matrix sigma_z() {
  Matrix h(2, 2);
  h << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(-1, 0);
  return h;
}

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = Complex(a, 0);
  m(1, 1) = Complex(b, 0);
  return m;
}

Vector excited() {
  Vector v(2);
  v << Complex(0, 0), Complex(1, 0);
  return v;
}

/// Random admissible cell values: sqrt(lambda) (w - 1) with w in the
/// closed unit disc keeps |1 + f/sqrt(lambda)| <= 1.
TestFunction random_test_function(double lambda, double t, int cells,
                                  Philox& rng) {
  std::vector<double> grid(cells + 1);
  for (int k = 0; k <= cells; ++k) grid[k] = t * k / cells;
  grid.back() = t;
  std::vector<Complex> values(cells);
  const double root = std::sqrt(lambda);
  for (int k = 0; k < cells; ++k) {
    double re, im;
    do {
      re = 2.0 * rng.next_double() - 1.0;
      im = 2.0 * rng.next_double() - 1.0;
    } while (re * re + im * im > 1.0);
    values[k] = root * (Complex(re, im) - 1.0);
  }
  return TestFunction(std::move(grid), std::move(values), lambda);
}

}  // namespace

ValidatedModel fixture_model() {
  ModelSpec spec;
  spec.dim = 2;
  spec.hamiltonian = sigma_z();
  spec.collapse = diag2(1.0, 0.8);
  spec.lambda = 1.0;
  return ValidatedModel(std::move(spec));
}

ValidatedModel fixture_survival_model() {
  ModelSpec spec;
  spec.dim = 2;
  spec.hamiltonian = Matrix::Zero(2, 2);
  spec.collapse = diag2(1.0, 0.8);
  spec.lambda = 1.0;
  return ValidatedModel(std::move(spec));
}

Matrix fixture_rate() { return diag2(0.0, 0.36); }

CheckResult check_poisson_law(unsigned workers) {
  (void)workers;
  const auto start = Clock::now();
  CheckResult result{"poisson-law", false, 0.0, ""};

  const int n_samples = 100000;
  const double lambda = 1.0, t = 1.0;
  std::vector<long> counts(7, 0);
  for (int i = 0; i < n_samples; ++i) {
    const JumpRecord rec = sample_jumps(lambda, t, 1000 + i);
    const std::size_t n = rec.times.size();
    if (n < counts.size()) ++counts[n];
  }

  double worst_z = 0.0;
  double p = std::exp(-lambda * t);
  bool ok = true;
  for (int k = 0; k <= 5; ++k) {
    const double expected = p;
    const double sigma =
        std::sqrt(expected * (1.0 - expected) / n_samples);
    const double freq = static_cast<double>(counts[k]) / n_samples;
    const double z = std::abs(freq - expected) / sigma;
    worst_z = std::max(worst_z, z);
    if (z > 3.0) ok = false;
    p *= lambda * t / (k + 1);
  }

  result.pass = ok;
  result.seconds = elapsed(start);
  result.detail = "max |z| over k=0..5: " + fmt(worst_z) + " (limit 3)";
  return result;
}

CheckResult check_survival_closed_form(unsigned workers) {
  const auto start = Clock::now();
  CheckResult result{"survival-closed-form", false, 0.0, ""};

  const ValidatedModel model = fixture_survival_model();
  const Vector eta = excited();
  const std::vector<double> grid = {0.0, 0.5, 1.0, 2.0};
  const EnsembleResult ens = ensemble_average(model, eta, 10000, grid, 7, workers);

  bool ok = true;
  double worst_z = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double target = std::exp(-0.36 * grid[k]);
    const double z =
        std::abs(ens.q_mean[k] - target) / std::max(ens.q_stderr[k], 1e-300);
    worst_z = std::max(worst_z, z);
    if (z > 3.0) ok = false;
  }

  const DensityPath master =
      integrate_master(model, eta * eta.adjoint(), grid);
  double worst_master = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    worst_master = std::max(
        worst_master, std::abs(master.trace[k] - std::exp(-0.36 * grid[k])));
  }
  if (worst_master > 1e-8) ok = false;

  result.pass = ok;
  result.seconds = elapsed(start);
  result.detail = "max MC z: " + fmt(worst_z) + " (limit 3); master |err|: " +
                  fmt(worst_master) + " (limit 1e-8)";
  return result;
}

CheckResult check_master_triple_oracle(unsigned workers) {
  const auto start = Clock::now();
  CheckResult result{"master-triple-oracle", false, 0.0, ""};

  const ValidatedModel model = fixture_model();
  const Vector eta = excited();
  const Matrix sigma = eta * eta.adjoint();
  const double t = 1.0;
  const std::vector<double> grid = uniform_grid(t, 10);

  const DensityPath rk4 = integrate_master(model, sigma, grid);
  const DysonResult dyson = dyson_series(model, sigma, t, 1e-12);
  const double rk4_vs_dyson = spectral_norm(rk4.rho.back() - dyson.rho);

  // MC channel with its own entrywise error bars (3 sigma Frobenius
  // envelope bounds the trace distance for d = 2 via |.|_1 <= sqrt(2)|.|_F).
  const int n_traj = 10000;
  const EnsembleResult ens =
      ensemble_average(model, eta, n_traj, grid, 11, workers);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(2, 2);
  for (int i = 0; i < n_traj; ++i) {
    const JumpRecord jumps = sample_jumps(model.lambda(), t, 11 + i);
    const TrajectoryPath path = evolve_state(model, jumps, eta, {0.0, t});
    const Matrix outer = path.chi.back() * path.chi.back().adjoint();
    sum_sq += (outer - ens.rho_bar.rho.back()).cwiseAbs2();
  }
  const double fro_var = sum_sq.sum() / (n_traj - 1.0) / n_traj;
  const double envelope = 3.0 * std::sqrt(2.0) / 2.0 * std::sqrt(fro_var);

  const double mc_vs_rk4 = trace_distance(ens.rho_bar.rho.back(), rk4.rho.back());
  const double mc_vs_dyson = trace_distance(ens.rho_bar.rho.back(), dyson.rho);

  result.pass = rk4_vs_dyson <= 1e-8 && mc_vs_rk4 <= envelope &&
                mc_vs_dyson <= envelope;
  result.seconds = elapsed(start);
  result.detail = "rk4 vs dyson: " + fmt(rk4_vs_dyson) +
                  " (limit 1e-8); MC dist: " + fmt(mc_vs_rk4) + ", " +
                  fmt(mc_vs_dyson) + " (envelope " + fmt(envelope) + ")";
  return result;
}

CheckResult check_ito_consistency(unsigned workers) {
  (void)workers;
  const auto start = Clock::now();
  CheckResult result{"ito-consistency", false, 0.0, ""};

  const ValidatedModel model = fixture_model();
  const std::vector<double> grid = uniform_grid(1.0, 10);

  double worst = 0.0;
  Philox rng(2024, 1);
  for (int i = 0; i < 100; ++i) {
    const Vector eta = random_state(2, rng);
    const JumpRecord jumps = sample_jumps(model.lambda(), 1.0, 500 + i);
    const TrajectoryPath path = evolve_state(model, jumps, eta, grid);
    const DensityPath dens =
        evolve_density(model, jumps, eta * eta.adjoint(), grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Matrix outer = path.chi[k] * path.chi[k].adjoint();
      worst = std::max(worst, (outer - dens.rho[k]).cwiseAbs().maxCoeff());
    }
  }

  result.pass = worst <= 1e-12;
  result.seconds = elapsed(start);
  result.detail = "max |outer - density|: " + fmt(worst) + " (limit 1e-12)";
  return result;
}

CheckResult check_genfun_identities(unsigned workers) {
  const auto start = Clock::now();
  CheckResult result{"genfun-identities", false, 0.0, ""};

  const double lambda = 1.0, t = 1.0;
  const int n_mc = 100000;
  bool ok = true;
  double worst_z = 0.0;

  Philox rng(99, 2);
  for (int rep = 0; rep < 3; ++rep) {
    const TestFunction f = random_test_function(lambda, t, 10, rng);
    const TestFunction g = random_test_function(lambda, t, 10, rng);

    const McScalar unit =
        mc_exponent_mean(dot_plus(f, g), n_mc, t, 3000 + rep, workers);
    const double z_unit =
        std::abs(unit.mean - Complex(1.0, 0.0)) / std::max(unit.stderr, 1e-300);

    const McScalar pair =
        mc_exponent_pair_mean(f, g, n_mc, t, 4000 + rep, workers);
    const Complex target = std::exp(f.product_integral(g, t));
    const double z_pair =
        std::abs(pair.mean - target) / std::max(pair.stderr, 1e-300);

    worst_z = std::max({worst_z, z_unit, z_pair});
    if (z_unit > 3.0 || z_pair > 3.0) ok = false;
  }

  // MC vs ODE channel on the reference model.
  const ValidatedModel model = fixture_model();
  const Vector eta = excited();
  const TestFunction f = random_test_function(lambda, t, 10, rng);
  const McVector mc = genfun_mc(model, f, eta, 10000, t, 5000, workers);
  const std::vector<Vector> ode = genfun_ode(model, f, eta, {0.0, t});
  const double dist = (mc.mean - ode.back()).norm();
  const double z_ode = dist / std::max(mc.stderr, 1e-300);
  worst_z = std::max(worst_z, z_ode);
  if (z_ode > 3.0) ok = false;

  result.pass = ok;
  result.seconds = elapsed(start);
  result.detail = "max |z|: " + fmt(worst_z) + " (limit 3)";
  return result;
}

CheckResult check_dilation_algebra(unsigned workers) {
  (void)workers;
  const auto start = Clock::now();
  CheckResult result{"dilation-algebra", false, 0.0, ""};

  bool ok = true;

  // Unitarity across random contractions, both flavors.
  double worst_unitarity = 0.0;
  Philox rng(77, 3);
  for (int i = 0; i < 50; ++i) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 3);
    const Matrix c = random_contraction(d, rng, 0.05 + 0.5 * rng.next_double());
    for (DilationFlavor flavor :
         {DilationFlavor::kHermitian, DilationFlavor::kNonHermitian}) {
      const DilationMatrix dil = build_dilation(c, flavor);
      worst_unitarity = std::max(worst_unitarity, dil.unitarity_defect);
    }
  }
  if (worst_unitarity > 1e-12) ok = false;

  // Compression identity on sampled trajectories with <= 6 jumps.
  const ValidatedModel model = fixture_model();
  const DilationMatrix herm =
      build_dilation(model.collapse(), DilationFlavor::kHermitian);
  const DilationMatrix nonherm =
      build_dilation(model.collapse(), DilationFlavor::kNonHermitian);
  double worst_compress = 0.0;
  int accepted = 0;
  std::uint64_t seed = 90000;
  while (accepted < 100) {
    const JumpRecord jumps = sample_jumps(model.lambda(), 1.0, seed++);
    if (jumps.times.size() > 6) continue;
    ++accepted;
    const Vector eta = random_state(2, rng);
    const Vector target = propagator_at(model, jumps, 1.0) * eta;
    for (const DilationMatrix* dil : {&herm, &nonherm}) {
      const DilatedState state = evolve_dilated(*dil, model, jumps, eta, 1.0);
      const Vector compressed = compress(state, dil->readout());
      worst_compress = std::max(worst_compress, (compressed - target).norm());
    }
  }
  if (worst_compress > 1e-12) ok = false;

  // Averaged survival through the dilation channel vs the master trace.
  const int n_surv = 2000;
  const Vector eta = excited();
  double sum_q = 0.0, sum_q2 = 0.0;
  for (int i = 0; i < n_surv; ++i) {
    const JumpRecord jumps = sample_jumps(model.lambda(), 1.0, 40000 + i);
    const DilatedState state = evolve_dilated(herm, model, jumps, eta, 1.0);
    const double q = compress(state, herm.readout()).squaredNorm();
    sum_q += q;
    sum_q2 += q * q;
  }
  const double mean_q = sum_q / n_surv;
  const double var_q =
      std::max(0.0, (sum_q2 - n_surv * mean_q * mean_q) / (n_surv - 1.0));
  const double stderr_q = std::sqrt(var_q / n_surv);
  const DensityPath master = integrate_master(
      model, eta * eta.adjoint(), {0.0, 1.0});
  const double z_surv =
      std::abs(mean_q - master.trace.back()) / std::max(stderr_q, 1e-300);
  if (z_surv > 3.0) ok = false;

  result.pass = ok;
  result.seconds = elapsed(start);
  result.detail = "unitarity: " + fmt(worst_unitarity) +
                  " (limit 1e-12); compression: " + fmt(worst_compress) +
                  " (limit 1e-12); survival z: " + fmt(z_surv) + " (limit 3)";
  return result;
}

CheckResult check_lambda_expansion(unsigned workers) {
  (void)workers;
  const auto start = Clock::now();
  CheckResult result{"lambda-expansion", false, 0.0, ""};

  const Matrix rate = fixture_rate();
  const double r2 = expansion_residual(rate, 1e2);
  const double r3 = expansion_residual(rate, 1e3);
  const double r4 = expansion_residual(rate, 1e4);
  const double ratio32 = r2 / r3;
  const double ratio43 = r3 / r4;

  result.pass = ratio32 >= 20.0 && ratio32 <= 45.0 && ratio43 >= 20.0 &&
                ratio43 <= 45.0;
  result.seconds = elapsed(start);
  result.detail = "residual ratios per x10 lambda: " + fmt(ratio32) + ", " +
                  fmt(ratio43) + " (window [20, 45])";
  return result;
}

CheckResult check_diffusion_limit(unsigned workers) {
  const auto start = Clock::now();
  CheckResult result{"diffusion-limit", false, 0.0, ""};

  const Matrix h = sigma_z();
  const Matrix rate = fixture_rate();
  const Vector eta = excited();
  bool ok = true;

  // Norm drift of the scheme law at two steps; the discrete second
  // moment is exact, so the O(dt) ratio is clean.
  const Matrix sigma = eta * eta.adjoint();
  const double drift4 =
      std::abs(em_discrete_second_moment(h, rate, sigma, 1e-4, 10000)
                   .trace()
                   .real() -
               1.0);
  const double drift5 =
      std::abs(em_discrete_second_moment(h, rate, sigma, 1e-5, 100000)
                   .trace()
                   .real() -
               1.0);
  const double drift_ratio = drift4 / drift5;
  if (!(drift_ratio >= 5.0 && drift_ratio <= 20.0)) ok = false;

  // Pathwise norm excursion at dt = 1e-4 stays within 1e-2.
  const DiffusionPath path =
      integrate_ito_schrodinger(h, rate, eta, 1e-4, 1.0, 12);
  double worst_norm = 0.0;
  for (const Vector& psi : path.psi) {
    worst_norm = std::max(worst_norm, std::abs(psi.squaredNorm() - 1.0));
  }
  if (worst_norm > 1e-2) ok = false;

  // Ensemble mean against exp(-K) eta: 3 sigma plus the exact scheme bias.
  const int n_paths = 10000;
  const double dt = 1e-3;
  const DiffusionEnsemble ens =
      diffusion_ensemble(h, rate, eta, n_paths, dt, 1.0, 600, 2, workers);
  const Matrix k_op = rate + Complex(0.0, 1.0) * h;
  const Vector target = expm(-k_op) * eta;
  const Vector discrete = em_discrete_mean(h, rate, eta, dt, 1000);
  const double bias = (discrete - target).norm();
  const double mean_err = (ens.mean.back() - target).norm();
  if (mean_err > 3.0 * ens.mean_stderr.back() + bias) ok = false;

  // Second-moment trace stays at 1 within 3 sigma + scheme drift.
  const double trace_err =
      std::abs(ens.second_moment.back().trace().real() - 1.0);
  const double trace_bias = std::abs(
      em_discrete_second_moment(h, rate, sigma, dt, 1000).trace().real() -
      1.0);
  if (trace_err > 3.0 * ens.trace_stderr.back() + trace_bias) ok = false;

  // Scalar closed form psi_t = exp(i sqrt(2r) w_t) eta, strong error.
  const double r_scalar = 0.36;
  Matrix h1 = Matrix::Zero(1, 1);
  Matrix rate1 = Matrix::Zero(1, 1);
  rate1(0, 0) = Complex(r_scalar, 0.0);
  Vector eta1(1);
  eta1 << Complex(1.0, 0.0);
  const double dt_s = 1e-4;
  const DiffusionPath scalar =
      integrate_ito_schrodinger(h1, rate1, eta1, dt_s, 1.0, 31);
  double w = 0.0;
  double strong_err = 0.0;
  for (std::size_t k = 1; k < scalar.psi.size(); ++k) {
    w += scalar.wiener[k - 1];
    const Complex exact = std::exp(Complex(0.0, std::sqrt(2.0 * r_scalar) * w));
    strong_err = std::max(strong_err, std::abs(scalar.psi[k][0] - exact));
  }
  if (strong_err > 5.0 * std::sqrt(dt_s)) ok = false;

  result.pass = ok;
  result.seconds = elapsed(start);
  result.detail = "drift ratio: " + fmt(drift_ratio) +
                  " (window [5, 20]); pathwise |q-1|: " + fmt(worst_norm) +
                  " (limit 1e-2); mean err: " + fmt(mean_err) + " (limit " +
                  fmt(3.0 * ens.mean_stderr.back() + bias) +
                  "); scalar strong err: " + fmt(strong_err) + " (limit " +
                  fmt(5.0 * std::sqrt(dt_s)) + ")";
  return result;
}

CheckResult check_zeno_sweep(unsigned workers) {
  const auto start = Clock::now();
  CheckResult result{"zeno-sweep", false, 0.0, ""};

  const Matrix h = sigma_z();
  const Matrix rate = fixture_rate();
  const Vector eta = excited();
  const std::vector<ZenoRow> rows =
      zeno_sweep(h, rate, {10.0, 100.0, 1000.0}, eta, 1.0, 10000, 21, 1e-3,
                 21, workers);

  bool ok = rows.size() == 4;
  for (std::size_t i = 0; ok && i + 2 < rows.size(); ++i) {
    if (!(rows[i].sup_state_error > rows[i + 1].sup_state_error)) ok = false;
    if (!(rows[i].dist_semigroup > rows[i + 1].dist_semigroup)) ok = false;
  }

  std::ostringstream detail;
  detail << "sup state err: ";
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    detail << fmt(rows[i].sup_state_error) << (i + 2 < rows.size() ? ", " : "");
  }
  detail << "; semigroup dist: ";
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    detail << fmt(rows[i].dist_semigroup) << (i + 2 < rows.size() ? ", " : "");
  }
  result.pass = ok;
  result.seconds = elapsed(start);
  result.detail = detail.str();
  return result;
}

CheckResult check_coherent_equivalence(unsigned workers) {
  (void)workers;
  const auto start = Clock::now();
  CheckResult result{"coherent-equivalence", false, 0.0, ""};

  bool ok = true;

  // Scalar embeddings reproduce the generating-functional propagator.
  const ValidatedModel model = fixture_model();
  const DilationMatrix dil =
      build_dilation(model.collapse(), DilationFlavor::kNonHermitian);
  const double t = 1.0;
  const std::vector<double> grid = uniform_grid(t, 10);
  const TestFunction f =
      TestFunction::constant(Complex(-0.3, 0.0), t, model.lambda());
  const TestFunction g =
      TestFunction::constant(Complex(-0.5, 0.2), t, model.lambda());
  const TestFunction zero = TestFunction::zero(t, model.lambda());

  const std::vector<Matrix> coherent =
      coherent_matrix_ode(model, dil, g, zero, f, zero, grid);
  const std::vector<Matrix> breve =
      breve_propagator(model, dot_plus(g.conjugated(), f), grid);
  double worst_scalar = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    worst_scalar =
        std::max(worst_scalar, spectral_norm(coherent[k] - breve[k]));
  }
  if (worst_scalar > 1e-8) ok = false;

  // Large-number limit of the coherent dynamics.
  const Matrix h = sigma_z();
  const Matrix rate = fixture_rate();
  std::vector<double> errors;
  for (double lambda : {1e2, 1e3, 1e4}) {
    const ValidatedModel family = model_from_rate(h, rate, lambda);
    const DilationMatrix dil_l =
        build_dilation(family.collapse(), DilationFlavor::kNonHermitian);
    const TestFunction f1 =
        TestFunction::constant(Complex(-0.4, 0.0), t, lambda);
    const TestFunction g1 =
        TestFunction::constant(Complex(-0.3, 0.1), t, lambda);
    const TestFunction zero_l = TestFunction::zero(t, lambda);
    const std::vector<Matrix> at_lambda =
        coherent_matrix_ode(family, dil_l, zero_l, g1, zero_l, f1, grid);

    const TestFunction f1_ref = TestFunction::constant(Complex(-0.4, 0.0), t, 1.0);
    const TestFunction g1_ref = TestFunction::constant(Complex(-0.3, 0.1), t, 1.0);
    const std::vector<Matrix> limit =
        limiting_coherent_ode(h, rate, g1_ref, f1_ref, grid);

    double err = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      err = std::max(err, spectral_norm(at_lambda[k] - limit[k]));
    }
    errors.push_back(err);
  }
  if (!(errors[0] > errors[1] && errors[1] > errors[2])) ok = false;

  result.pass = ok;
  result.seconds = elapsed(start);
  result.detail = "scalar-embedding err: " + fmt(worst_scalar) +
                  " (limit 1e-8); limit errors: " + fmt(errors[0]) + ", " +
                  fmt(errors[1]) + ", " + fmt(errors[2]) + " (decreasing)";
  return result;
}

std::vector<CheckResult> run_acceptance(unsigned workers) {
  return {
      check_poisson_law(workers),
      check_survival_closed_form(workers),
      check_master_triple_oracle(workers),
      check_ito_consistency(workers),
      check_genfun_identities(workers),
      check_dilation_algebra(workers),
      check_lambda_expansion(workers),
      check_diffusion_limit(workers),
      check_zeno_sweep(workers),
      check_coherent_equivalence(workers),
  };
}

}  // namespace qcollapse::verify
