#include <iostream>
#include <string>
#include <vector>

#include "physfac/cli/app.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return physfac::cli::run(args, std::cout, std::cerr);
}
