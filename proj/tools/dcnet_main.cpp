// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/cli.hpp"

int main(int argc, char** argv) { return dcnet::cli::run(argc, argv); }
