#include <iostream>

#include "qtunnel_cli/cli.hpp"

int main(int argc, char** argv) { return qtunnel::cli::run(argc, argv, std::cout, std::cerr); }
