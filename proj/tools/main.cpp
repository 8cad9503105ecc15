#include <iostream>
#include <string>
#include <vector>

#include "extremile/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return extremile::run_cli(args, std::cout, std::cerr);
}
