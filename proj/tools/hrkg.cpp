#include <iostream>

#include "hrkg/cli.hpp"

int main(int argc, char** argv) { return hrkg::cli::run(argc, argv, std::cout, std::cerr); }
