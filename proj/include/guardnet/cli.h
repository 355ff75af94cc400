// Copyright 2026 The GuardNet Authors
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

#ifndef GUARDNET_CLI_H_
#define GUARDNET_CLI_H_

#include <ostream>

namespace guardnet {

// Exit codes: 0 success, 1 usage error, 2 data or validation error,
// 3 numeric failure.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace guardnet

#endif  // GUARDNET_CLI_H_
