#include <iostream>
#include <string>
#include <vector>

#include "defuse/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return defuse::main_entry(args, std::cout, std::cerr);
}
