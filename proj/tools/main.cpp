#include <iostream>
#include <string>
#include <vector>

#include "cyclone/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cyclone::run_cli(args, std::cout, std::cerr);
}
