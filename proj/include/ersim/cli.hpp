// SPDX-License-Identifier: Apache-2.0

#ifndef ERSIM_CLI_HPP
#define ERSIM_CLI_HPP

#include <iosfwd>

namespace ersim::cli
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitAborted = 2;

//
// ersim <spectrum|wkb|propagate|verify-transform|scenario|sweep|model-dump>
//       --config PATH [--out DIR] [--seed-check] [--quiet]
//
// Returns 0 on success, 1 for usage or validation errors, 2 when a propagation aborted (a
// partial report flagged "aborted" is still written).
//
int Main(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace ersim::cli

#endif  // ERSIM_CLI_HPP
