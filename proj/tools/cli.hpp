/*
 * Copyright 2026 The PixelProbe Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PIXELPROBE_TOOLS_CLI_HPP
#define PIXELPROBE_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace pixelprobe::cli {

enum ExitCode : int {
  kOk = 0,
  kFailed = 1,        // some image or record failed, or verification found problems
  kUsage = 2,         // bad arguments or configuration
  kOracleDown = 3,    // oracle unreachable; rerun to resume
};

/// Runs the command line (without the program name). All output goes to the
/// given streams.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pixelprobe::cli

#endif  // PIXELPROBE_TOOLS_CLI_HPP
