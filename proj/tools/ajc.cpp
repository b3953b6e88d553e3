#include <iostream>

#include "ajc/cli.hpp"

int main(int argc, char** argv) { return ajc::cli::run(argc, argv, std::cout, std::cerr); }
