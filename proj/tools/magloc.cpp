#include <iostream>

#include "magloc/cli/app.hpp"

int main(int argc, char** argv) { return magloc::cli::run(argc, argv, std::cout, std::cerr); }
