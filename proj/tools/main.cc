#include <iostream>

#include "rumour/cli.h"

int main(int argc, char** argv) { return rumour::run_cli(argc, argv, std::cout, std::cerr); }
