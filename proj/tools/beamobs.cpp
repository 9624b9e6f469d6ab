#include <iostream>

#include "beamobs/cli.hpp"

int main(int argc, char** argv) { return beamobs::run_cli(argc, argv, std::cout, std::cerr); }
