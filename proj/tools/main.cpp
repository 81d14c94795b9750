#include <iostream>

#include "hrst/cli.hpp"

int main(int argc, char** argv) { return hrst::run_cli(argc, argv, std::cout, std::cerr); }
