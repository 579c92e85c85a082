#include <iostream>

#include "abcwb/cli.hpp"

int main(int argc, char** argv) {
  return abcwb::cli::run_cli(argc, argv, std::cout, std::cerr);
}
