#include <iostream>

#include "hyqurp/cli.hpp"

int main(int argc, char** argv) { return hyqurp::run_cli(argc, argv, std::cout, std::cerr); }
