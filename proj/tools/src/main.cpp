#include <iostream>

#include "pintmf/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return pintmf::cli::run(args, std::cout, std::cerr);
}
