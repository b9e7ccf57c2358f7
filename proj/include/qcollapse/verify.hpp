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
#include <vector>

#include "qcollapse/model.hpp"

namespace qcollapse::verify {

struct CheckResult {
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

/// Reference two-level model: H = sigma_z, C = diag(1, 0.8), lambda = 1.
ValidatedModel fixture_model();
/// Decay-only variant with H = 0.
ValidatedModel fixture_survival_model();
/// Rate operator diag(0, 0.36) for the large-number family.
Matrix fixture_rate();

CheckResult check_poisson_law(unsigned workers);
CheckResult check_survival_closed_form(unsigned workers);
CheckResult check_master_triple_oracle(unsigned workers);
CheckResult check_ito_consistency(unsigned workers);
CheckResult check_genfun_identities(unsigned workers);
CheckResult check_dilation_algebra(unsigned workers);
CheckResult check_lambda_expansion(unsigned workers);
CheckResult check_diffusion_limit(unsigned workers);
CheckResult check_zeno_sweep(unsigned workers);
CheckResult check_coherent_equivalence(unsigned workers);

/// All cross-oracle checks in order.
std::vector<CheckResult> run_acceptance(unsigned workers = 0);

}  // namespace qcollapse::verify
