#include <iostream>

#include "amrvns/cli.hpp"

int main(int argc, char** argv) { return amrvns::run_cli(argc, argv, std::cout, std::cerr); }
