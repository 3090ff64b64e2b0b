#include "gn3/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return gn3::main_entry(argc, argv, std::cout, std::cerr); }
