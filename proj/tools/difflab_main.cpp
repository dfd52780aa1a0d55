// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "difflab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return difflab::run_cli(args, std::cout, std::cerr);
}
