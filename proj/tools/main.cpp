#include <iostream>

#include "fpi/cli.hpp"

int main(int argc, char** argv) { return fpi::run_cli(argc, argv, std::cout, std::cerr); }
