#include <iostream>

#include "entroset/cli.hpp"

int main(int argc, char** argv) { return entroset::cli::dispatch(argc, argv, std::cout, std::cerr); }
