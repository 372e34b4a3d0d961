#include <iostream>

#include "hnmsing/cli.hpp"

int main(int argc, char** argv) { return hnmsing::run_cli(argc, argv, std::cout, std::cerr); }
