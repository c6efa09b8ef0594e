#include <iostream>
#include <string>
#include <vector>

#include "ptc/io/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ptc::io::run_subcommand(args, std::cout, std::cerr);
}
