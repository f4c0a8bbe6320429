#include <iostream>

#include "impulsive/cli.hpp"

int main(int argc, char** argv) { return impulsive::cli::run(argc, argv, std::cout, std::cerr); }
