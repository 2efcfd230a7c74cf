#include <iostream>

#include "ordagg/cli.hpp"

int main(int argc, char** argv) { return ordagg::cli::run(argc, argv, std::cout, std::cerr); }
