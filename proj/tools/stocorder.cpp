#include "stocorder_cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return stocorder::cli::run(argc, argv, std::cout, std::cerr); }
