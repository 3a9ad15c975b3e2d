#include <iostream>

#include "kmm/harness.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  try {
    return kmm::run_cli(argc, argv, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "kmismatch: " << e.what() << "\n";
    return 3;
  }
}
