#include "opfgrad/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return opfgrad::run_cli(argc, argv, std::cout, std::cerr); }
