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

#include "qcollapse/model_io.hpp"

#include <fstream>

#include <Eigen/Eigenvalues>

namespace qcollapse {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& where,
                             const std::string& what) {
  throw Error(ErrorCode::ParseError, where + ": " + what);
}

Complex complex_from_json(const json& node, const std::string& where) {
  if (!node.is_array() || node.size() != 2 || !node[0].is_number() ||
      !node[1].is_number()) {
    parse_fail(where, "expected [re, im]");
  }
  return Complex(node[0].get<double>(), node[1].get<double>());
}

double number_field(const json& doc, const std::string& key) {
  if (!doc.contains(key)) parse_fail(key, "missing field");
  if (!doc[key].is_number()) parse_fail(key, "expected a number");
  return doc[key].get<double>();
}

}  // namespace

Matrix matrix_from_json(const json& node, const std::string& where) {
  if (!node.is_array() || node.empty()) {
    parse_fail(where, "expected a non-empty array of rows");
  }
  const std::size_t rows = node.size();
  Matrix m;
  for (std::size_t i = 0; i < rows; ++i) {
    const json& row = node[i];
    const std::string row_path = where + "[" + std::to_string(i) + "]";
    if (!row.is_array()) parse_fail(row_path, "expected an array");
    if (i == 0) {
      m.resize(rows, row.size());
    } else if (row.size() != static_cast<std::size_t>(m.cols())) {
      parse_fail(row_path, "ragged row length");
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      m(i, j) = complex_from_json(
          row[j], row_path + "[" + std::to_string(j) + "]");
    }
  }
  return m;
}

Vector vector_from_json(const json& node, const std::string& where) {
  if (!node.is_array() || node.empty()) {
    parse_fail(where, "expected a non-empty array");
  }
  Vector v(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    v[i] = complex_from_json(node[i], where + "[" + std::to_string(i) + "]");
  }
  return v;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back({m(i, j).real(), m(i, j).imag()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back({v[i].real(), v[i].imag()});
  }
  return out;
}

ModelSpec model_from_json(const json& doc) {
  ModelSpec spec;
  const double dim = number_field(doc, "dim");
  spec.dim = static_cast<int>(dim);
  if (spec.dim <= 0 || dim != spec.dim) {
    parse_fail("dim", "expected a positive integer");
  }
  spec.lambda = number_field(doc, "lambda");

  if (!doc.contains("H")) parse_fail("H", "missing field");
  spec.hamiltonian = matrix_from_json(doc["H"], "H");

  const bool has_c = doc.contains("C");
  const bool has_r = doc.contains("R");
  if (!has_c && !has_r) parse_fail("C", "need either C or R");
  if (has_r) {
    spec.rate = matrix_from_json(doc["R"], "R");
    if (spec.rate->rows() != spec.dim) {
      parse_fail("R", "dimension mismatch with dim");
    }
    if (spec.lambda <= 0.0) {
      parse_fail("R", "rate form requires lambda > 0");
    }
    spec.collapse =
        Matrix::Identity(spec.dim, spec.dim) - *spec.rate / spec.lambda;
  }
  if (has_c) {
    spec.collapse = matrix_from_json(doc["C"], "C");
  }
  return spec;
}

ModelSpec load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ParseError, "cannot open model file: " + path);
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError,
                path + ": invalid JSON (" + std::string(e.what()) + ")");
  }
  return model_from_json(doc);
}

InitialState load_initial_state(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ParseError, "cannot open state file: " + path);
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError,
                path + ": invalid JSON (" + std::string(e.what()) + ")");
  }
  InitialState state;
  if (doc.contains("psi")) {
    state.pure = true;
    state.psi = vector_from_json(doc["psi"], "psi");
    if (state.psi.size() != dim) parse_fail("psi", "dimension mismatch");
    if (state.psi.norm() < 1e-12) parse_fail("psi", "zero vector");
    state.psi.normalize();
    state.density = state.psi * state.psi.adjoint();
  } else if (doc.contains("rho")) {
    state.density = matrix_from_json(doc["rho"], "rho");
    if (state.density.rows() != dim || state.density.cols() != dim) {
      parse_fail("rho", "dimension mismatch");
    }
    const Matrix diff = state.density - state.density.adjoint();
    if (diff.cwiseAbs().maxCoeff() > kTolHerm) {
      parse_fail("rho", "not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(
        0.5 * (state.density + state.density.adjoint()));
    if (eig.eigenvalues().minCoeff() < -kTolPsd) {
      parse_fail("rho", "not positive semidefinite");
    }
    if (state.density.trace().real() > 1.0 + kTolPsd) {
      parse_fail("rho", "trace exceeds 1");
    }
  } else {
    parse_fail("psi", "state file needs either psi or rho");
  }
  return state;
}

}  // namespace qcollapse
