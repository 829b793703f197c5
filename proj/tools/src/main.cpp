#include <iostream>

#include "reebldp_cli/cli.hpp"

int main(int argc, char** argv) { return reebldp::cli::run(argc, argv, std::cout, std::cerr); }
