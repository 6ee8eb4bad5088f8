// Copyright 2026 The STEC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STEC_TOOLS_CLI_HPP_
#define STEC_TOOLS_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

// Front end of the `stec` tool:
//
//   stec train  --config run.ini [--seed 1,2] [--out dir] [--precision 64]
//   stec eval   --weights w.bin --config run.ini [--split test] [--out dir]
//   stec ablate --config a.ini [--config b.ini ...] [--seed ...] [--out dir]
//   stec verify [--seed 0] [--cases 100] [--inject-fault]
//   stec flops  [--config run.ini] [--fields 10]
namespace stec::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationError = 1,
  kPropertyFailure = 2,
  kRuntimeFailure = 3,
};

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);
int run(int argc, char** argv);

}  // namespace stec::cli

#endif  // STEC_TOOLS_CLI_HPP_
