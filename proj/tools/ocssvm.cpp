#include <iostream>
#include <string>
#include <vector>

#include "ocssvm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ocssvm::cli::run_cli(args, std::cout, std::cerr);
}
