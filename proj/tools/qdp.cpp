#include <iostream>
#include <string>
#include <vector>

#include "qdp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return qdp::cli::run(args, std::cout, std::cerr);
}
