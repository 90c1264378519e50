#include "jsrda/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return jsrda::cli_main(argc, argv, std::cout, std::cerr); }
