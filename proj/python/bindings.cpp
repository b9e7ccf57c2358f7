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

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qcollapse/diffusion.hpp"
#include "qcollapse/dilation.hpp"
#include "qcollapse/genfun.hpp"
#include "qcollapse/linalg.hpp"
#include "qcollapse/master.hpp"
#include "qcollapse/model_io.hpp"
#include "qcollapse/trajectory.hpp"
#include "qcollapse/verify.hpp"

namespace py = pybind11;
using namespace qcollapse;

namespace {

ValidatedModel make_model(const Matrix& hamiltonian, const Matrix& collapse,
                          double lambda, std::optional<Matrix> rate) {
  ModelSpec spec;
  spec.dim = static_cast<int>(hamiltonian.rows());
  spec.hamiltonian = hamiltonian;
  spec.collapse = collapse;
  spec.lambda = lambda;
  spec.rate = std::move(rate);
  return ValidatedModel(std::move(spec));
}

ValidatedModel model_from_file(const std::string& path) {
  return ValidatedModel(load_model(path));
}

}  // namespace

PYBIND11_MODULE(_qcollapse, m) {
  m.doc() = "Poisson-collapse dynamics of unstable quantum systems";

  py::register_exception<Error>(m, "SimulationError");

  py::class_<ValidatedModel>(m, "Model")
      .def(py::init(&make_model), py::arg("hamiltonian"), py::arg("collapse"),
           py::arg("lam"), py::arg("rate") = std::nullopt)
      .def_static("from_file", &model_from_file, py::arg("path"))
      .def_static(
          "from_rate",
          [](const Matrix& h, const Matrix& r, double lam) {
            return model_from_rate(h, r, lam);
          },
          py::arg("hamiltonian"), py::arg("rate"), py::arg("lam"))
      .def_property_readonly("dim", &ValidatedModel::dim)
      .def_property_readonly("lam", &ValidatedModel::lambda)
      .def_property_readonly("hamiltonian", &ValidatedModel::hamiltonian)
      .def_property_readonly("collapse", &ValidatedModel::collapse)
      .def_property_readonly("rate", &ValidatedModel::rate)
      .def("free_propagator", &ValidatedModel::free_propagator, py::arg("dt"));

  m.def("semigroup_generator", &semigroup_generator);
  m.def("limit_generator", &limit_generator);
  m.def("expm", &expm);
  m.def("psd_sqrt", &psd_sqrt);
  m.def("spectral_norm", &spectral_norm);
  m.def("trace_distance", &trace_distance);

  py::class_<Philox>(m, "Philox")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"),
           py::arg("stream"))
      .def("next_u64", &Philox::next_u64)
      .def("next_double", &Philox::next_double)
      .def("next_exponential", &Philox::next_exponential, py::arg("rate"))
      .def("next_normal", &Philox::next_normal);

  py::class_<JumpRecord>(m, "JumpRecord")
      .def(py::init([](double t_max, std::vector<double> times, double lam) {
             JumpRecord rec;
             rec.t_max = t_max;
             rec.times = std::move(times);
             rec.lambda = lam;
             return rec;
           }),
           py::arg("t_max"), py::arg("times"), py::arg("lam"))
      .def_readonly("t_max", &JumpRecord::t_max)
      .def_readonly("times", &JumpRecord::times)
      .def_readonly("lam", &JumpRecord::lambda)
      .def_readonly("seed", &JumpRecord::seed)
      .def("count_before", &JumpRecord::count_before, py::arg("t"));

  py::class_<TrajectoryPath>(m, "TrajectoryPath")
      .def_readonly("grid", &TrajectoryPath::grid)
      .def_readonly("chi", &TrajectoryPath::chi)
      .def_readonly("q", &TrajectoryPath::q)
      .def_readonly("eta", &TrajectoryPath::eta);

  py::class_<DensityPath>(m, "DensityPath")
      .def_readonly("grid", &DensityPath::grid)
      .def_readonly("rho", &DensityPath::rho)
      .def_readonly("trace", &DensityPath::trace);

  py::class_<EnsembleResult>(m, "EnsembleResult")
      .def_readonly("rho_bar", &EnsembleResult::rho_bar)
      .def_readonly("q_mean", &EnsembleResult::q_mean)
      .def_readonly("q_stderr", &EnsembleResult::q_stderr);

  m.def("sample_jumps", &sample_jumps, py::arg("lam"), py::arg("t_max"),
        py::arg("seed"));
  m.def("propagator_at", &propagator_at, py::arg("model"), py::arg("jumps"),
        py::arg("t"));
  m.def("evolve_state", &evolve_state, py::arg("model"), py::arg("jumps"),
        py::arg("eta0"), py::arg("grid"));
  m.def("evolve_density", &evolve_density, py::arg("model"), py::arg("jumps"),
        py::arg("sigma"), py::arg("grid"));
  m.def("ensemble_average", &ensemble_average, py::arg("model"),
        py::arg("eta0"), py::arg("n"), py::arg("grid"), py::arg("seed_base"),
        py::arg("workers") = 0,
        py::call_guard<py::gil_scoped_release>());
  m.def("uniform_grid", &uniform_grid, py::arg("t_max"), py::arg("n_steps"));

  m.def("integrate_master", &integrate_master, py::arg("model"),
        py::arg("sigma"), py::arg("grid"));
  py::class_<DysonResult>(m, "DysonResult")
      .def_readonly("rho", &DysonResult::rho)
      .def_readonly("order", &DysonResult::order)
      .def_readonly("nodes", &DysonResult::nodes)
      .def_readonly("tail", &DysonResult::tail);
  m.def("dyson_series", &dyson_series, py::arg("model"), py::arg("sigma"),
        py::arg("t"), py::arg("tol"), py::arg("n_cap") = 40);
  m.def("contraction_semigroup", &contraction_semigroup, py::arg("model"),
        py::arg("sigma"), py::arg("grid"));

  py::class_<TestFunction>(m, "TestFunction")
      .def(py::init<std::vector<double>, std::vector<Complex>, double>(),
           py::arg("grid"), py::arg("values"), py::arg("lambda_ref"))
      .def_static("zero", &TestFunction::zero, py::arg("t_max"),
                  py::arg("lambda_ref"))
      .def_static("constant", &TestFunction::constant, py::arg("value"),
                  py::arg("t_max"), py::arg("lambda_ref"))
      .def_property_readonly("grid", &TestFunction::grid)
      .def_property_readonly("values", &TestFunction::values)
      .def_property_readonly("lambda_ref", &TestFunction::lambda_ref)
      .def("value_at", &TestFunction::value_at, py::arg("t"))
      .def("integral", &TestFunction::integral, py::arg("t"))
      .def("product_integral", &TestFunction::product_integral,
           py::arg("other"), py::arg("t"))
      .def("conjugated", &TestFunction::conjugated);

  m.def("dot_plus", &dot_plus, py::arg("f"), py::arg("g"));
  m.def("stochastic_exponent", &stochastic_exponent, py::arg("f"),
        py::arg("jumps"), py::arg("t"));
  m.def("breve_propagator", &breve_propagator, py::arg("model"), py::arg("f"),
        py::arg("grid"));
  m.def("genfun_ode", &genfun_ode, py::arg("model"), py::arg("f"),
        py::arg("eta0"), py::arg("grid"));

  py::class_<McVector>(m, "McVector")
      .def_readonly("mean", &McVector::mean)
      .def_readonly("stderr", &McVector::stderr);
  py::class_<McScalar>(m, "McScalar")
      .def_readonly("mean", &McScalar::mean)
      .def_readonly("stderr", &McScalar::stderr);
  m.def("genfun_mc", &genfun_mc, py::arg("model"), py::arg("f"),
        py::arg("eta0"), py::arg("n"), py::arg("t"), py::arg("seed_base"),
        py::arg("workers") = 0, py::call_guard<py::gil_scoped_release>());
  m.def("mc_exponent_mean", &mc_exponent_mean, py::arg("f"), py::arg("n"),
        py::arg("t"), py::arg("seed_base"), py::arg("workers") = 0,
        py::call_guard<py::gil_scoped_release>());
  m.def("mc_exponent_pair_mean", &mc_exponent_pair_mean, py::arg("f"),
        py::arg("g"), py::arg("n"), py::arg("t"), py::arg("seed_base"),
        py::arg("workers") = 0, py::call_guard<py::gil_scoped_release>());
  m.def("tilde_kernel", &tilde_kernel, py::arg("model"), py::arg("eta"),
        py::arg("tuple"), py::arg("t"));

  py::class_<KernelTable>(m, "KernelTable")
      .def_readonly("max_order", &KernelTable::max_order)
      .def_readonly("t", &KernelTable::t)
      .def_property_readonly(
          "nodes", [](const KernelTable& kt) { return kt.rule.nodes; })
      .def_readonly("values", &KernelTable::values);
  py::class_<KernelInnerProduct>(m, "KernelInnerProduct")
      .def_readonly("value", &KernelInnerProduct::value)
      .def_readonly("last_term_ratio", &KernelInnerProduct::last_term_ratio)
      .def_readonly("truncation_warning",
                    &KernelInnerProduct::truncation_warning);
  m.def("model_kernel_table", &model_kernel_table, py::arg("model"),
        py::arg("eta"), py::arg("t"), py::arg("max_order"), py::arg("nodes"));
  m.def("exponential_kernel_table", &exponential_kernel_table, py::arg("g"),
        py::arg("t"), py::arg("max_order"), py::arg("nodes"),
        py::arg("direction"));
  m.def("kernel_inner_product", &kernel_inner_product, py::arg("phi"),
        py::arg("chi"), py::arg("n_max"));

  py::enum_<DilationFlavor>(m, "DilationFlavor")
      .value("HERMITIAN", DilationFlavor::kHermitian)
      .value("NON_HERMITIAN", DilationFlavor::kNonHermitian);

  py::class_<DilationMatrix>(m, "DilationMatrix")
      .def_readonly("d", &DilationMatrix::d)
      .def_readonly("s", &DilationMatrix::s)
      .def_readonly("flavor", &DilationMatrix::flavor)
      .def_readonly("unitarity_defect", &DilationMatrix::unitarity_defect)
      .def_readonly("intertwining_defect",
                    &DilationMatrix::intertwining_defect)
      .def("block", &DilationMatrix::block, py::arg("i"), py::arg("k"))
      .def("readout", &DilationMatrix::readout);

  py::class_<DilatedState>(m, "DilatedState")
      .def_static("initial", &DilatedState::initial, py::arg("eta"))
      .def_readonly("dim_h", &DilatedState::dim_h)
      .def_readonly("n_meters", &DilatedState::n_meters)
      .def_readonly("t", &DilatedState::t)
      .def_readonly("amp", &DilatedState::amp);

  m.def("build_dilation", &build_dilation, py::arg("contraction"),
        py::arg("flavor"));
  m.def("dilated_step", &dilated_step, py::arg("dilation"), py::arg("model"),
        py::arg("state"), py::arg("dt_free"), py::arg("apply_jump"));
  m.def("compress", &compress, py::arg("state"), py::arg("e_out"));
  m.def("evolve_dilated", &evolve_dilated, py::arg("dilation"),
        py::arg("model"), py::arg("jumps"), py::arg("eta"), py::arg("t"));
  m.def("coherent_matrix_ode", &coherent_matrix_ode, py::arg("model"),
        py::arg("dilation"), py::arg("g0"), py::arg("g1"), py::arg("f0"),
        py::arg("f1"), py::arg("grid"));
  m.def("limiting_coherent_ode", &limiting_coherent_ode,
        py::arg("hamiltonian"), py::arg("rate"), py::arg("g1"), py::arg("f1"),
        py::arg("grid"));
  m.def("expansion_residual", &expansion_residual, py::arg("rate"),
        py::arg("lam"));

  py::class_<DiffusionPath>(m, "DiffusionPath")
      .def_readonly("dt", &DiffusionPath::dt)
      .def_readonly("seed", &DiffusionPath::seed)
      .def_readonly("grid", &DiffusionPath::grid)
      .def_readonly("psi", &DiffusionPath::psi)
      .def_readonly("wiener", &DiffusionPath::wiener);

  py::class_<DiffusionEnsemble>(m, "DiffusionEnsemble")
      .def_readonly("grid", &DiffusionEnsemble::grid)
      .def_readonly("mean", &DiffusionEnsemble::mean)
      .def_readonly("second_moment", &DiffusionEnsemble::second_moment)
      .def_readonly("mean_stderr", &DiffusionEnsemble::mean_stderr)
      .def_readonly("trace_stderr", &DiffusionEnsemble::trace_stderr);

  py::class_<ZenoRow>(m, "ZenoRow")
      .def_readonly("lam", &ZenoRow::lambda)
      .def_readonly("side_condition_ok", &ZenoRow::side_condition_ok)
      .def_readonly("sup_state_error", &ZenoRow::sup_state_error)
      .def_readonly("dist_semigroup", &ZenoRow::dist_semigroup)
      .def_readonly("dist_diffusion", &ZenoRow::dist_diffusion);

  m.def("integrate_ito_schrodinger", &integrate_ito_schrodinger,
        py::arg("hamiltonian"), py::arg("rate"), py::arg("eta0"),
        py::arg("dt"), py::arg("t_max"), py::arg("seed"),
        py::arg("renormalize") = false);
  m.def("diffusion_ensemble", &diffusion_ensemble, py::arg("hamiltonian"),
        py::arg("rate"), py::arg("eta0"), py::arg("n"), py::arg("dt"),
        py::arg("t_max"), py::arg("seed_base"), py::arg("n_snapshots") = 11,
        py::arg("workers") = 0, py::call_guard<py::gil_scoped_release>());
  m.def("zeno_sweep", &zeno_sweep, py::arg("hamiltonian"), py::arg("rate"),
        py::arg("lambdas"), py::arg("eta0"), py::arg("t_max"), py::arg("n"),
        py::arg("seed_base"), py::arg("dt") = 1e-3, py::arg("n_grid") = 21,
        py::arg("workers") = 0, py::call_guard<py::gil_scoped_release>());

  py::class_<verify::CheckResult>(m, "CheckResult")
      .def_readonly("name", &verify::CheckResult::name)
      .def_readonly("passed", &verify::CheckResult::pass)
      .def_readonly("seconds", &verify::CheckResult::seconds)
      .def_readonly("detail", &verify::CheckResult::detail);
  m.def("run_acceptance", &verify::run_acceptance, py::arg("workers") = 0,
        py::call_guard<py::gil_scoped_release>());
}
