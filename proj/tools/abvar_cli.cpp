#include <iostream>

#include "abvar/cli.hpp"

int main(int argc, char** argv) { return abvar::cli::main_entry(argc, argv, std::cout, std::cerr); }
