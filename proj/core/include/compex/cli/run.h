// Copyright 2026 The Compex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COMPEX_CLI_RUN_H_
#define COMPEX_CLI_RUN_H_

#include <ostream>
#include <string>
#include <vector>

namespace compex::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. Results go to `out`, progress and the final
/// "error: <kind>: <message>" line to `err`. Returns 0, 1 for runtime
/// failures or 2 for bad flags.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace compex::cli

#endif  // COMPEX_CLI_RUN_H_
