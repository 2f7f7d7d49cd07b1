#include <iostream>

#include "adaptsel/cli.hpp"

int main(int argc, char** argv) { return adaptsel::cli::run(argc, argv, std::cout, std::cerr); }
