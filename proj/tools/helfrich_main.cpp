#include <iostream>
#include <string>
#include <vector>

#include "helfrich/cli_export.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return helfrich::runCli(args, std::cout, std::cerr);
}
