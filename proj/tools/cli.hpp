/*
 Copyright 2026 The parshoot Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef PARSHOOT_TOOLS_CLI_HPP
#define PARSHOOT_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace parshoot::cli
{

  enum ExitCode : int
  {
    kOk = 0,
    kNotCoercive = 1,
    kNoConvergence = 2,
    kSingular = 3,
    kUsage = 64,
  };

  /// Runs the command line args (without the program name); reports go to out, diagnostics to err.
  int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

  /// Worker count for sweeps: the requested count capped by PARSHOOT_THREADS when set.
  int worker_count(int requested);

} // namespace parshoot::cli

#endif
