#include <iostream>

#include "bwmodel/cli.hpp"

int main(int argc, char** argv) { return bwmodel::cli::run(argc, argv, std::cout, std::cerr); }
