#include <iostream>

#include "stman/cli/app.hpp"

int main(int argc, char** argv) { return stman::cli::run(argc, argv, std::cout, std::cerr); }
