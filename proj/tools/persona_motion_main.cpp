#include <iostream>

#include "persona_motion/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return persona::cli::run(args, std::cout, std::cerr);
}
