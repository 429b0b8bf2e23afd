#include <iostream>

#include "rbb/cli.hpp"

int main(int argc, char** argv) { return rbb::cli::run(argc, argv, std::cout, std::cerr); }
