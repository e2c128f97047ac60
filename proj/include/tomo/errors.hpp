// Copyright 2026 tomodesign contributors.
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

#include <stdexcept>
#include <string>

namespace tomo {

/// Machine-readable failure categories. The CLI maps these onto exit codes:
/// validation failures -> 1, parse/config -> 2, numerical -> 3.
enum class errc {
    invalid_dimension,
    invalid_state,
    invalid_basis,
    invalid_povm,
    degenerate_element,
    dimension_mismatch,
    under_determined_design,
    over_complete_design,
    singular_design,
    invalid_probability,
    invalid_prior,
    non_estimating_direction,
    domain_error,
    infeasible,
    parse_error,
};

class Error : public std::runtime_error {
  public:
    Error(errc code, const std::string &what)
        : std::runtime_error(what), code_(code) {}

    errc code() const noexcept { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string &msg) {
    throw Error(code, msg);
}

inline void require(bool cond, errc code, const std::string &msg) {
    if (!cond) fail(code, msg);
}

} // namespace tomo
