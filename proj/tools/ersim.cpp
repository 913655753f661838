// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "ersim/cli.hpp"

int main(int argc, char **argv)
{
  return ersim::cli::Main(argc, argv, std::cout, std::cerr);
}
