#include <iostream>

#include "relbif/cli.hpp"

int main(int argc, char** argv) { return relbif::run_cli(argc, argv, std::cout, std::cerr); }
