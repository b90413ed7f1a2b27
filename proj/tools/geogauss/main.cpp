#include <iostream>

#include "geogauss/cli.hpp"

int main(int argc, char** argv) { return geogauss::cli::run(argc, argv, std::cout, std::cerr); }
