// Copyright 2026-present the embedlens authors
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

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "embedlens/error.hpp"

namespace embedlens {

inline constexpr std::string_view kToolName = "embedlens";
inline constexpr std::string_view kVersion = "0.1.0";

/// Process exit statuses.
enum ExitCode : int {
    kExitOk = 0,
    kExitIo = 1,
    kExitValidation = 2,
    kExitNumerical = 3,
};

int
exit_code_for(ErrorCode code);

/// Entry point behind the embedlens binary. args excludes the program name.
/// Reports go to `out` unless --out names a file; diagnostics go to `err`.
int
run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace embedlens
