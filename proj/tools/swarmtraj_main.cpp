#include <iostream>

#include "swarmtraj/cli_io.hpp"

int main(int argc, char** argv) { return swarmtraj::cli::run(argc, argv, std::cout, std::cerr); }
