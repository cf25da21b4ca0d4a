#include <iostream>

#include "cli_runner.hpp"

int main(int argc, char** argv) { return gibbs::cli::main_entry(argc, argv, std::cout, std::cerr); }
