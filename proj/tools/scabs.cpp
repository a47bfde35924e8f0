#include <iostream>

#include "scabs/cli.hpp"

int main(int argc, char** argv) { return scabs::run_cli(argc, argv, std::cout, std::cerr); }
