#include <iostream>

#include "sruner/cli.hpp"

int main(int argc, char** argv) { return sruner::run_cli(argc, argv, std::cout, std::cerr); }
