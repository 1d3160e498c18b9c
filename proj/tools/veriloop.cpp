// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "veriloop/cli/cli.hpp"

int main(int argc, char** argv) { return veriloop::cli::run(argc, argv, std::cout, std::cerr); }
