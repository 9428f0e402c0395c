// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dcnet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // validation or domain failure
inline constexpr int kExitUsage = 2;

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace dcnet::cli
