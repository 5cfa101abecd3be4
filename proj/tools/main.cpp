#include "etc/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return etc::run_cli(argc, argv, std::cout, std::cerr); }
