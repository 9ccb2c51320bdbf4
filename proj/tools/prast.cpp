#include "prast/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return prast::cli_main(argc, argv, std::cout, std::cerr); }
