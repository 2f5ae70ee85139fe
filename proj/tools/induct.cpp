#include "induct/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return induct::cli::main(argc, argv, std::cout, std::cerr); }
