#include <iostream>

#include "parklot/engine/commands.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  return parklot::engine::cli_main(argc, argv, {std::cin, std::cout, std::cerr});
}
