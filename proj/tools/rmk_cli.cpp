#include <iostream>

#include "rmk/cli.hpp"

int main(int argc, char** argv) { return rmk::cli::run(argc, argv, std::cout, std::cerr); }
