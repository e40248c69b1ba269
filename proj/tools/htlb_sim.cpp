#include <iostream>

#include "htlb/cli.hpp"

int main(int argc, char** argv) { return htlb::cli_main(argc, argv, std::cout, std::cerr); }
