#include <iostream>
#include <string>
#include <vector>

#include "pilot_cli/cli.hpp"

int main(int argc, char** argv) {
  return pilot::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
