#include <iostream>

#include "sspg_cli/commands.hpp"

int main(int argc, char** argv) { return sspg::cli::run_cli(argc, argv, std::cout, std::cerr); }
