#include "tvrise/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return tvrise::cli::main_entry(argc, argv, std::cout, std::cerr); }
