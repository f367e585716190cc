#include <iostream>

#include "mnn/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mnn::cli::run(args, std::cout, std::cerr);
}
