#include <iostream>

#include "legalnlp/cli.hpp"

int main(int argc, char** argv) { return legalnlp::run_cli(argc, argv, std::cout, std::cerr); }
