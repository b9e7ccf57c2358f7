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

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcollapse/diffusion.hpp"
#include "qcollapse/dilation.hpp"
#include "qcollapse/genfun.hpp"
#include "qcollapse/linalg.hpp"
#include "qcollapse/master.hpp"
#include "qcollapse/model_io.hpp"
#include "qcollapse/parallel.hpp"
#include "qcollapse/trajectory.hpp"
#include "qcollapse/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qcollapse;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct RunContext {
  std::string out_dir = ".";
  unsigned workers = 0;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  std::vector<std::string> outputs;

  fs::path resolve(const std::string& name) const {
    return fs::path(out_dir) / name;
  }

  std::ofstream open(const std::string& name) {
    fs::create_directories(out_dir);
    const fs::path path = resolve(name);
    std::ofstream out(path);
    if (!out) {
      throw Error(ErrorCode::ParseError, "cannot write " + path.string());
    }
    outputs.push_back(path.string());
    std::cerr << "writing " << path.string() << "\n";
    return out;
  }

  void manifest(const std::string& command, const json& config) {
    json doc;
    doc["command"] = command;
    doc["version"] = kVersion;
    doc["config"] = config;
    doc["workers"] = resolve_workers(workers);
    doc["outputs"] = outputs;
    doc["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    fs::create_directories(out_dir);
    const fs::path path = resolve(command + "_manifest.json");
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
    std::cerr << "writing " << path.string() << "\n";
  }
};

Vector default_initial(int dim) {
  Vector eta = Vector::Zero(dim);
  eta[dim - 1] = Complex(1.0, 0.0);
  return eta;
}

InitialState initial_or_default(const std::string& path, int dim) {
  if (!path.empty()) return load_initial_state(path, dim);
  InitialState state;
  state.pure = true;
  state.psi = default_initial(dim);
  state.density = state.psi * state.psi.adjoint();
  return state;
}

TestFunction load_test_function(const std::string& path, double lambda) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ParseError, "cannot open test function: " + path);
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError,
                path + ": invalid JSON (" + std::string(e.what()) + ")");
  }
  if (!doc.contains("grid") || !doc["grid"].is_array()) {
    throw Error(ErrorCode::ParseError, "grid: missing or not an array");
  }
  std::vector<double> grid;
  for (const auto& v : doc["grid"]) grid.push_back(v.get<double>());
  if (!doc.contains("values")) {
    throw Error(ErrorCode::ParseError, "values: missing field");
  }
  const Vector vals = vector_from_json(doc["values"], "values");
  std::vector<Complex> values(vals.data(), vals.data() + vals.size());
  const double lambda_ref =
      doc.contains("lambda_ref") ? doc["lambda_ref"].get<double>() : lambda;
  if (lambda_ref != lambda) {
    throw Error(ErrorCode::LambdaMismatch,
                "test-function lambda_ref disagrees with the model");
  }
  return TestFunction(std::move(grid), std::move(values), lambda_ref);
}

std::vector<double> make_grid(double t_max, double dt) {
  if (t_max <= 0.0 || dt <= 0.0) {
    throw std::invalid_argument("need t_max > 0 and dt > 0");
  }
  const int steps = static_cast<int>(std::llround(t_max / dt));
  if (steps < 1 || std::abs(steps * dt - t_max) > 1e-9 * t_max) {
    throw std::invalid_argument("dt must divide t_max");
  }
  return uniform_grid(t_max, steps);
}

int run_trajectories(const std::string& model_path,
                     const std::string& initial_path, int n, double t_max,
                     double dt, std::uint64_t seed, int dump, bool rho_json,
                     RunContext& ctx) {
  const ValidatedModel model = ValidatedModel(load_model(model_path));
  const InitialState init = initial_or_default(initial_path, model.dim());
  if (!init.pure) {
    throw Error(ErrorCode::ParseError,
                "trajectories needs a pure initial state");
  }
  const std::vector<double> grid = make_grid(t_max, dt);
  const EnsembleResult ens =
      ensemble_average(model, init.psi, n, grid, seed, ctx.workers);

  {
    std::ofstream out = ctx.open("trajectories.csv");
    out << "t,q_mean,q_stderr\n";
    for (std::size_t k = 0; k < grid.size(); ++k) {
      out << fmt_double(grid[k]) << ',' << fmt_double(ens.q_mean[k]) << ','
          << fmt_double(ens.q_stderr[k]) << '\n';
    }
  }

  if (dump > 0) {
    std::ofstream out = ctx.open("trajectories_dump.csv");
    out << "trajectory,t,q,n_jumps\n";
    for (int i = 0; i < dump && i < n; ++i) {
      const JumpRecord jumps =
          sample_jumps(model.lambda(), t_max, seed + static_cast<unsigned>(i));
      const TrajectoryPath path = evolve_state(model, jumps, init.psi, grid);
      for (std::size_t k = 0; k < grid.size(); ++k) {
        out << i << ',' << fmt_double(grid[k]) << ',' << fmt_double(path.q[k])
            << ',' << jumps.count_before(grid[k]) << '\n';
      }
    }
  }

  if (rho_json) {
    std::ofstream out = ctx.open("rho_bar.json");
    json doc = json::array();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      doc.push_back({{"t", grid[k]},
                     {"rho", matrix_to_json(ens.rho_bar.rho[k])},
                     {"trace", ens.rho_bar.trace[k]}});
    }
    out << doc.dump(2) << "\n";
  }

  ctx.manifest("trajectories", {{"model", model_path},
                                {"initial", initial_path},
                                {"n", n},
                                {"t_max", t_max},
                                {"dt", dt},
                                {"seed", seed},
                                {"dump", dump}});
  return 0;
}

int run_master(const std::string& model_path, const std::string& initial_path,
               double t_max, double dt, RunContext& ctx) {
  const ValidatedModel model = ValidatedModel(load_model(model_path));
  const InitialState init = initial_or_default(initial_path, model.dim());
  const std::vector<double> grid = make_grid(t_max, dt);
  const DensityPath path = integrate_master(model, init.density, grid);

  std::ofstream out = ctx.open("master.csv");
  out << "t,trace,purity";
  for (int i = 0; i < model.dim(); ++i) {
    for (int j = 0; j < model.dim(); ++j) {
      out << ",re_rho_" << i << j << ",im_rho_" << i << j;
    }
  }
  out << '\n';
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Matrix& rho = path.rho[k];
    out << fmt_double(grid[k]) << ',' << fmt_double(path.trace[k]) << ','
        << fmt_double((rho * rho).trace().real());
    for (int i = 0; i < model.dim(); ++i) {
      for (int j = 0; j < model.dim(); ++j) {
        out << ',' << fmt_double(rho(i, j).real()) << ','
            << fmt_double(rho(i, j).imag());
      }
    }
    out << '\n';
  }

  ctx.manifest("master", {{"model", model_path},
                          {"initial", initial_path},
                          {"t_max", t_max},
                          {"dt", dt}});
  return 0;
}

int run_dyson(const std::string& model_path, const std::string& initial_path,
              double t, double tol, RunContext& ctx) {
  const ValidatedModel model = ValidatedModel(load_model(model_path));
  const InitialState init = initial_or_default(initial_path, model.dim());
  const DysonResult result = dyson_series(model, init.density, t, tol);

  std::cout << "truncation order " << result.order << ", " << result.nodes
            << " quadrature nodes, tail bound " << fmt_double(result.tail)
            << "\n";

  std::ofstream out = ctx.open("dyson.json");
  json doc;
  doc["t"] = t;
  doc["tol"] = tol;
  doc["order"] = result.order;
  doc["nodes"] = result.nodes;
  doc["tail_bound"] = result.tail;
  doc["rho"] = matrix_to_json(result.rho);
  doc["trace"] = result.rho.trace().real();
  out << doc.dump(2) << "\n";

  ctx.manifest("dyson", {{"model", model_path},
                         {"initial", initial_path},
                         {"t", t},
                         {"tol", tol}});
  return 0;
}

int run_genfun(const std::string& model_path, const std::string& testfn_path,
               const std::string& initial_path, const std::string& mode,
               double t_max, double dt, int n, std::uint64_t seed,
               RunContext& ctx) {
  const ValidatedModel model = ValidatedModel(load_model(model_path));
  const InitialState init = initial_or_default(initial_path, model.dim());
  if (!init.pure) {
    throw Error(ErrorCode::ParseError, "genfun needs a pure initial state");
  }
  const TestFunction f = load_test_function(testfn_path, model.lambda());
  const std::vector<double> grid = make_grid(t_max, dt);

  const bool want_ode = mode == "ode" || mode == "both";
  const bool want_mc = mode == "mc" || mode == "both";

  std::vector<Vector> ode;
  if (want_ode) ode = genfun_ode(model, f, init.psi, grid);
  std::vector<McVector> mc(grid.size());
  if (want_mc) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (grid[k] == 0.0) {
        mc[k].mean = init.psi;
        mc[k].stderr = 0.0;
      } else {
        mc[k] = genfun_mc(model, f, init.psi, n, grid[k], seed, ctx.workers);
      }
    }
  }

  std::ofstream out = ctx.open("genfun.csv");
  out << "t";
  if (want_ode) {
    for (int i = 0; i < model.dim(); ++i) {
      out << ",ode_re_" << i << ",ode_im_" << i;
    }
  }
  if (want_mc) {
    for (int i = 0; i < model.dim(); ++i) {
      out << ",mc_re_" << i << ",mc_im_" << i;
    }
    out << ",mc_stderr";
  }
  if (want_ode && want_mc) out << ",z";
  out << '\n';
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out << fmt_double(grid[k]);
    if (want_ode) {
      for (int i = 0; i < model.dim(); ++i) {
        out << ',' << fmt_double(ode[k][i].real()) << ','
            << fmt_double(ode[k][i].imag());
      }
    }
    if (want_mc) {
      for (int i = 0; i < model.dim(); ++i) {
        out << ',' << fmt_double(mc[k].mean[i].real()) << ','
            << fmt_double(mc[k].mean[i].imag());
      }
      out << ',' << fmt_double(mc[k].stderr);
    }
    if (want_ode && want_mc) {
      const double dist = (mc[k].mean - ode[k]).norm();
      const double z = mc[k].stderr > 0.0 ? dist / mc[k].stderr : 0.0;
      out << ',' << fmt_double(z);
    }
    out << '\n';
  }

  ctx.manifest("genfun", {{"model", model_path},
                          {"testfn", testfn_path},
                          {"initial", initial_path},
                          {"mode", mode},
                          {"t_max", t_max},
                          {"dt", dt},
                          {"n", n},
                          {"seed", seed}});
  return 0;
}

int run_dilation(const std::string& model_path, const std::string& flavor_name,
                 int n, int max_jumps, double t_max, std::uint64_t seed,
                 RunContext& ctx) {
  const ValidatedModel model = ValidatedModel(load_model(model_path));
  const Vector eta = default_initial(model.dim());

  std::vector<DilationFlavor> flavors;
  if (flavor_name == "hermitian") {
    flavors = {DilationFlavor::kHermitian};
  } else if (flavor_name == "nonhermitian") {
    flavors = {DilationFlavor::kNonHermitian};
  } else {
    flavors = {DilationFlavor::kHermitian, DilationFlavor::kNonHermitian};
  }

  json report;
  report["model"] = model_path;
  report["flavors"] = json::array();

  for (DilationFlavor flavor : flavors) {
    const DilationMatrix dil = build_dilation(model.collapse(), flavor);
    json entry;
    entry["flavor"] =
        flavor == DilationFlavor::kHermitian ? "hermitian" : "nonhermitian";
    entry["unitarity_defect"] = dil.unitarity_defect;
    entry["intertwining_defect"] = dil.intertwining_defect;

    json trajectories = json::array();
    double worst = 0.0;
    double sum_q = 0.0, sum_q2 = 0.0;
    std::uint64_t s = seed;
    for (int used = 0; used < n;) {
      const JumpRecord jumps = sample_jumps(model.lambda(), t_max, s++);
      if (static_cast<int>(jumps.times.size()) > max_jumps) continue;
      ++used;
      const DilatedState state = evolve_dilated(dil, model, jumps, eta, t_max);
      const Vector read = compress(state, dil.readout());
      const Vector target = propagator_at(model, jumps, t_max) * eta;
      const double residual = (read - target).norm();
      worst = std::max(worst, residual);
      const double q = read.squaredNorm();
      sum_q += q;
      sum_q2 += q * q;
      if (trajectories.size() < 32) {
        trajectories.push_back({{"seed", s - 1},
                                {"n_jumps", jumps.times.size()},
                                {"compression_residual", residual}});
      }
    }
    entry["trajectories"] = trajectories;
    entry["max_compression_residual"] = worst;

    const double mean_q = sum_q / n;
    const double var_q =
        n > 1 ? std::max(0.0, (sum_q2 - n * mean_q * mean_q) / (n - 1.0))
              : 0.0;
    const DensityPath master =
        integrate_master(model, eta * eta.adjoint(), {0.0, t_max});
    entry["survival"] = {{"t", t_max},
                         {"mc_mean", mean_q},
                         {"mc_stderr", std::sqrt(var_q / n)},
                         {"master_trace", master.trace.back()}};
    report["flavors"].push_back(entry);
  }

  std::ofstream out = ctx.open("dilation_report.json");
  out << report.dump(2) << "\n";

  ctx.manifest("dilation", {{"model", model_path},
                            {"flavor", flavor_name},
                            {"n", n},
                            {"max_jumps", max_jumps},
                            {"t_max", t_max},
                            {"seed", seed}});
  return 0;
}

int run_diffusion(const std::string& model_path,
                  const std::string& initial_path, int n, double dt,
                  double t_max, std::uint64_t seed, bool renormalize,
                  RunContext& ctx) {
  const ValidatedModel model = ValidatedModel(load_model(model_path));
  if (!model.rate()) {
    throw Error(ErrorCode::InconsistentR,
                "diffusion needs a model with a rate operator R");
  }
  const InitialState init = initial_or_default(initial_path, model.dim());
  if (!init.pure) {
    throw Error(ErrorCode::ParseError, "diffusion needs a pure initial state");
  }

  if (n <= 1) {
    const DiffusionPath path = integrate_ito_schrodinger(
        model.hamiltonian(), *model.rate(), init.psi, dt, t_max, seed,
        renormalize);
    const std::size_t stride =
        std::max<std::size_t>(1, (path.psi.size() - 1) / 2000);
    std::ofstream out = ctx.open("diffusion.csv");
    out << "t";
    for (int i = 0; i < model.dim(); ++i) out << ",re_" << i << ",im_" << i;
    out << ",norm_sq\n";
    for (std::size_t k = 0; k < path.psi.size(); ++k) {
      if (k % stride != 0 && k + 1 != path.psi.size()) continue;
      out << fmt_double(path.grid[k]);
      for (int i = 0; i < model.dim(); ++i) {
        out << ',' << fmt_double(path.psi[k][i].real()) << ','
            << fmt_double(path.psi[k][i].imag());
      }
      out << ',' << fmt_double(path.psi[k].squaredNorm()) << '\n';
    }
  } else {
    const DiffusionEnsemble ens =
        diffusion_ensemble(model.hamiltonian(), *model.rate(), init.psi, n,
                           dt, t_max, seed, 21, ctx.workers);
    std::ofstream out = ctx.open("diffusion_ensemble.csv");
    out << "t";
    for (int i = 0; i < model.dim(); ++i) {
      out << ",mean_re_" << i << ",mean_im_" << i;
    }
    out << ",moment_trace,mean_stderr,trace_stderr\n";
    for (std::size_t k = 0; k < ens.grid.size(); ++k) {
      out << fmt_double(ens.grid[k]);
      for (int i = 0; i < model.dim(); ++i) {
        out << ',' << fmt_double(ens.mean[k][i].real()) << ','
            << fmt_double(ens.mean[k][i].imag());
      }
      out << ',' << fmt_double(ens.second_moment[k].trace().real()) << ','
          << fmt_double(ens.mean_stderr[k]) << ','
          << fmt_double(ens.trace_stderr[k]) << '\n';
    }
  }

  ctx.manifest("diffusion", {{"model", model_path},
                             {"initial", initial_path},
                             {"n", n},
                             {"dt", dt},
                             {"t_max", t_max},
                             {"seed", seed},
                             {"renormalize", renormalize}});
  return 0;
}

int run_zeno(const std::string& model_path, const std::string& lambdas_csv,
             int n, double t_max, double dt, std::uint64_t seed,
             RunContext& ctx) {
  const ValidatedModel model = ValidatedModel(load_model(model_path));
  if (!model.rate()) {
    throw Error(ErrorCode::InconsistentR,
                "zeno needs a model with a rate operator R");
  }
  std::vector<double> lambdas;
  {
    std::stringstream ss(lambdas_csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) lambdas.push_back(std::stod(item));
    }
  }
  if (lambdas.empty()) {
    throw std::invalid_argument("need at least one lambda");
  }

  const Vector eta = default_initial(model.dim());
  const std::vector<ZenoRow> rows =
      zeno_sweep(model.hamiltonian(), *model.rate(), lambdas, eta, t_max, n,
                 seed, dt, 21, ctx.workers);

  std::ofstream out = ctx.open("zeno.csv");
  out << "lambda,side_condition_ok,sup_state_error,dist_semigroup,"
         "dist_diffusion\n";
  for (const ZenoRow& row : rows) {
    if (std::isinf(row.lambda)) {
      out << "inf";
    } else {
      out << fmt_double(row.lambda);
    }
    out << ',' << (row.side_condition_ok ? 1 : 0) << ','
        << fmt_double(row.sup_state_error) << ','
        << fmt_double(row.dist_semigroup) << ','
        << fmt_double(row.dist_diffusion) << '\n';
  }

  ctx.manifest("zeno", {{"model", model_path},
                        {"lambdas", lambdas_csv},
                        {"n", n},
                        {"t_max", t_max},
                        {"dt", dt},
                        {"seed", seed}});
  return 0;
}

int run_verify(const std::string& model_path, RunContext& ctx) {
  if (!model_path.empty()) {
    // The cross-oracle suite is pinned to the bundled reference model;
    // any custom file must parse, validate, and match it.
    const ValidatedModel given = ValidatedModel(load_model(model_path));
    const ValidatedModel reference = verify::fixture_model();
    const bool matches =
        given.dim() == reference.dim() &&
        given.lambda() == reference.lambda() &&
        spectral_norm(given.hamiltonian() - reference.hamiltonian()) < 1e-12 &&
        spectral_norm(given.collapse() - reference.collapse()) < 1e-12;
    if (!matches) {
      std::cerr << "verify runs the bundled d=2 reference suite; "
                << model_path << " differs from fixtures/d2_fixture.json\n";
      return 1;
    }
  }

  const std::vector<verify::CheckResult> results =
      verify::run_acceptance(ctx.workers);
  bool all_pass = true;
  for (const auto& r : results) {
    all_pass = all_pass && r.pass;
    std::printf("[%s] %-24s %6.2fs  %s\n", r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.seconds, r.detail.c_str());
  }
  ctx.manifest("verify", {{"model", model_path}, {"pass", all_pass}});
  return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poisson-collapse dynamics of unstable quantum systems"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string out_dir = ".";
  if (const char* env = std::getenv("QCOLLAPSE_OUTDIR")) out_dir = env;
  unsigned workers = 0;
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--workers", workers,
                 "Worker threads (0 = QCOLLAPSE_WORKERS or hardware)");

  std::string model_path, initial_path, testfn_path;
  std::string mode = "ode", flavor = "both", lambdas = "10,100,1000";
  int n = 10000, dump = 0, max_jumps = 12;
  double t_max = 1.0, dt = 0.01, t = 1.0, tol = 1e-10, dt_diff = 1e-4,
         dt_zeno = 1e-3;
  std::uint64_t seed = 1;
  bool rho_json = false, renormalize = false;

  auto* c_traj = app.add_subcommand(
      "trajectories",
      "Monte Carlo survival statistics over jump trajectories");
  c_traj->add_option("--model", model_path, "Model JSON file")->required();
  c_traj->add_option("--initial", initial_path,
                     "Initial pure state JSON (default: last basis vector)");
  c_traj->add_option("--n", n, "Number of trajectories")
      ->capture_default_str();
  c_traj->add_option("--t-max", t_max, "Horizon")->capture_default_str();
  c_traj->add_option("--dt", dt, "Output grid step")->capture_default_str();
  c_traj->add_option("--seed", seed, "Seed base")->capture_default_str();
  c_traj->add_option("--dump", dump, "Also dump the first K trajectories");
  c_traj->add_flag("--rho-json", rho_json, "Write averaged density snapshots");

  auto* c_master = app.add_subcommand(
      "master", "Deterministic averaged master equation (RK4)");
  c_master->add_option("--model", model_path, "Model JSON file")->required();
  c_master->add_option("--initial", initial_path,
                       "Initial state JSON (psi or rho)");
  c_master->add_option("--t-max", t_max, "Horizon")->capture_default_str();
  c_master->add_option("--dt", dt, "Output grid step")->capture_default_str();

  auto* c_dyson = app.add_subcommand(
      "dyson", "Dyson-von Neumann series oracle at a single time");
  c_dyson->add_option("--model", model_path, "Model JSON file")->required();
  c_dyson->add_option("--initial", initial_path, "Initial state JSON");
  c_dyson->add_option("--t", t, "Evaluation time")->capture_default_str();
  c_dyson->add_option("--tol", tol, "Series tolerance")->capture_default_str();

  auto* c_genfun = app.add_subcommand(
      "genfun", "Generating functional: ODE and/or Monte Carlo channels");
  c_genfun->add_option("--model", model_path, "Model JSON file")->required();
  c_genfun->add_option("--testfn", testfn_path, "Test-function JSON file")
      ->required();
  c_genfun->add_option("--initial", initial_path, "Initial pure state JSON");
  c_genfun->add_option("--mode", mode, "ode | mc | both")
      ->check(CLI::IsMember({"ode", "mc", "both"}))
      ->capture_default_str();
  c_genfun->add_option("--t-max", t_max, "Horizon")->capture_default_str();
  c_genfun->add_option("--dt", dt, "Output grid step")->capture_default_str();
  c_genfun->add_option("--n", n, "Trajectories for the MC channel")
      ->capture_default_str();
  c_genfun->add_option("--seed", seed, "Seed base")->capture_default_str();

  auto* c_dil = app.add_subcommand(
      "dilation", "Unitary dilation diagnostics along sampled trajectories");
  c_dil->add_option("--model", model_path, "Model JSON file")->required();
  c_dil->add_option("--flavor", flavor, "hermitian | nonhermitian | both")
      ->check(CLI::IsMember({"hermitian", "nonhermitian", "both"}))
      ->capture_default_str();
  c_dil->add_option("--n", n, "Sampled trajectories")->capture_default_str();
  c_dil->add_option("--max-jumps", max_jumps, "Skip busier trajectories")
      ->capture_default_str();
  c_dil->add_option("--t-max", t_max, "Horizon")->capture_default_str();
  c_dil->add_option("--seed", seed, "Seed base")->capture_default_str();

  auto* c_diff = app.add_subcommand(
      "diffusion",
      "Ito-Schrodinger diffusion limit (single path or ensemble)");
  c_diff->add_option("--model", model_path, "Model JSON file (rate form)")
      ->required();
  c_diff->add_option("--initial", initial_path, "Initial pure state JSON");
  c_diff->add_option("--n", n, "Paths (1 = single-path CSV)")
      ->capture_default_str();
  c_diff->add_option("--dt", dt_diff, "Euler-Maruyama step")
      ->capture_default_str();
  c_diff->add_option("--t-max", t_max, "Horizon")->capture_default_str();
  c_diff->add_option("--seed", seed, "Seed base")->capture_default_str();
  c_diff->add_flag("--renormalize", renormalize,
                   "Renormalize after each step (exploratory)");

  auto* c_zeno = app.add_subcommand(
      "zeno", "Jump-vs-semigroup-vs-diffusion crossover table");
  c_zeno->add_option("--model", model_path, "Model JSON file (rate form)")
      ->required();
  c_zeno->add_option("--lambdas", lambdas, "Comma-separated intensities")
      ->capture_default_str();
  c_zeno->add_option("--n", n, "Trajectories per row")->capture_default_str();
  c_zeno->add_option("--t-max", t_max, "Horizon")->capture_default_str();
  c_zeno->add_option("--dt", dt_zeno, "Diffusion step")->capture_default_str();
  c_zeno->add_option("--seed", seed, "Seed base")->capture_default_str();

  auto* c_verify = app.add_subcommand(
      "verify", "Run the full cross-oracle suite on the bundled fixture");
  c_verify->add_option("--model", model_path,
                       "Optional model file; must match the bundled fixture");

  // Let --out/--workers appear after the subcommand name too.
  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  RunContext ctx;
  ctx.out_dir = out_dir;
  ctx.workers = workers;

  try {
    if (app.got_subcommand(c_traj)) {
      return run_trajectories(model_path, initial_path, n, t_max, dt, seed,
                              dump, rho_json, ctx);
    }
    if (app.got_subcommand(c_master)) {
      return run_master(model_path, initial_path, t_max, dt, ctx);
    }
    if (app.got_subcommand(c_dyson)) {
      return run_dyson(model_path, initial_path, t, tol, ctx);
    }
    if (app.got_subcommand(c_genfun)) {
      return run_genfun(model_path, testfn_path, initial_path, mode, t_max,
                        dt, n, seed, ctx);
    }
    if (app.got_subcommand(c_dil)) {
      return run_dilation(model_path, flavor, n, max_jumps, t_max, seed, ctx);
    }
    if (app.got_subcommand(c_diff)) {
      return run_diffusion(model_path, initial_path, n, dt_diff, t_max, seed,
                           renormalize, ctx);
    }
    if (app.got_subcommand(c_zeno)) {
      return run_zeno(model_path, lambdas, n, t_max, dt_zeno, seed, ctx);
    }
    if (app.got_subcommand(c_verify)) {
      return run_verify(model_path, ctx);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
