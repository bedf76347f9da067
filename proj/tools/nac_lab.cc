#include <iostream>

#include "naclab/cli.h"

int main(int argc, char** argv) { return naclab::run_cli(argc, argv, std::cout, std::cerr); }
