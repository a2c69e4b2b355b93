#include <iostream>
#include <string>
#include <vector>

#include "hclimits/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return hclimits::cli::run(args, std::cout, std::cerr);
}
