#include "coreset/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return coreset::cli_main(argc, argv, std::cout, std::cerr); }
