#include <iostream>

#include "tcode/cli.hpp"

int main(int argc, char** argv) { return tcode::run_cli(argc, argv, std::cout, std::cerr); }
