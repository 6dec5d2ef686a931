#include "sylkrylov/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return sylkrylov::cli::run(argc, argv, std::cout, std::cerr); }
