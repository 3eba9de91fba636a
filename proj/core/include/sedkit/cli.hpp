// Copyright 2026 The sedkit Authors
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

#ifndef SEDKIT_CLI_HPP_
#define SEDKIT_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace sedkit {

// Entry point behind the sedkit binary: subcommands gen-data, train, eval,
// score, ablate.  Option precedence is flag > config file > built-in
// default, and each subcommand prints where every effective value came
// from before running.  Returns the process exit code: 0 success, 1 usage
// or configuration error, 2 data error, 3 numerical abort.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace sedkit

#endif  // SEDKIT_CLI_HPP_
