#include <iostream>

#include "sedkit/cli.hpp"

int main(int argc, char** argv) { return sedkit::run_cli(argc, argv, std::cout, std::cerr); }
