// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "tessera/cli/cli.hpp"

int main(int argc, char** argv) { return tessera::cli::main(argc, argv, std::cout, std::cerr); }
