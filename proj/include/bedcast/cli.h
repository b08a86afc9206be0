/*
* Copyright (C) 2026 bedcast contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#ifndef BEDCAST_CLI_H
#define BEDCAST_CLI_H

#include <iosfwd>
#include <string>
#include <vector>

namespace bedcast
{

inline constexpr int kExitOk    = 0;
inline constexpr int kExitData  = 1;
inline constexpr int kExitUsage = 2;

/**
 * Entry point of the `bedcast` command. `args` excludes the program name.
 * Returns 0 on success, 2 on usage errors and 1 on data errors; messages go to `err`.
 */
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace bedcast

#endif // BEDCAST_CLI_H
