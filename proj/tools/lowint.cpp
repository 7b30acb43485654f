#include <iostream>
#include <string>
#include <vector>

#include "lowint/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return lowint::cli::run(args, std::cout, std::cerr);
}
