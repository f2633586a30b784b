#include <iostream>

#include "graphmark/cli.hpp"

int main(int argc, char** argv) {
  return graphmark::cli::dispatch(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
