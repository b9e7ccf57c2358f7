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

#include <string>

#include <json.hpp>

#include "qcollapse/model.hpp"
#include "qcollapse/types.hpp"

namespace qcollapse {

/// Model document schema:
///
///   {
///     "dim": 2,
///     "lambda": 1.0,
///     "H": [[[re, im], ...], ...],   // dim x dim, entries as [re, im]
///     "C": ...                       // or "R" (then C = I - R/lambda)
///   }
///
/// Parse errors cite the offending JSON path, e.g. "H[0][1]".
ModelSpec model_from_json(const nlohmann::json& doc);
ModelSpec load_model(const std::string& path);

/// Complex matrix from nested [re, im] arrays; `where` prefixes error paths.
Matrix matrix_from_json(const nlohmann::json& node, const std::string& where);
Vector vector_from_json(const nlohmann::json& node, const std::string& where);

nlohmann::json matrix_to_json(const Matrix& m);
nlohmann::json vector_to_json(const Vector& v);

/// Initial-state document: {"psi": [[re, im], ...]} for a pure state or
/// {"rho": [[[re, im], ...], ...]} for a density matrix.
struct InitialState {
  Matrix density;
  bool pure = false;
  Vector psi;  // set when pure
};

InitialState load_initial_state(const std::string& path, int dim);

}  // namespace qcollapse
