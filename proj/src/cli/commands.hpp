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

#include <filesystem>
#include <iosfwd>
#include <nlohmann/json.hpp>

namespace embedlens::cli {

using ordered_json = nlohmann::ordered_json;

/// Extracts the run configuration embedded in a JSON report, a run sidecar,
/// or the "# config:" line of a CSV report.
ordered_json
config_from_report(const std::filesystem::path& path);

/// Runs one fully resolved configuration and returns the process exit code.
int
execute(const ordered_json& config, std::ostream& out, std::ostream& err);

}  // namespace embedlens::cli
