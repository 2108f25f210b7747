#include <iostream>

#include "train_cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return train::cli::main_with(args, std::cout, std::cerr);
}
