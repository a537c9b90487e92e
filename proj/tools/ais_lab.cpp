#include <iostream>

#include "aislab/cli.hpp"

int main(int argc, char** argv) { return aislab::cli::run(argc, argv, std::cout, std::cerr); }
