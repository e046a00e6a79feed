// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include "singlecodec/cli/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return singlecodec::RunCli(args, std::cout, std::cerr);
}
