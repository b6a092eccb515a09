#include <iostream>

#include "nsd/commands.hpp"

int main(int argc, char** argv) { return nsd::cli::run(argc, argv, std::cout, std::cerr); }
