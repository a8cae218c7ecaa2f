#include <iostream>
#include <string>
#include <vector>

#include "kfss/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return kfss::run_cli(args, std::cout, std::cerr);
}
