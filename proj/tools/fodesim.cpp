#include <iostream>

#include "fodesim/cli.hpp"

int main(int argc, char** argv) { return fodesim::cli::run(argc, argv, std::cout, std::cerr); }
