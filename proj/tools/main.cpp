#include <iostream>

#include "eolgp/cli.hpp"

int main(int argc, char** argv) { return eolgp::run_cli(argc, argv, std::cout, std::cerr); }
