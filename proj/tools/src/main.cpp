#include <iostream>

#include "steklov_cli/cli.hpp"

int main(int argc, char** argv) { return steklov::cli::run(argc, argv, std::cout, std::cerr); }
