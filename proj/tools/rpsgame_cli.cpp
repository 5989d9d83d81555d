#include <iostream>

#include "rpsgame/commands.hpp"

int main(int argc, char** argv) { return rpsgame::run_cli(argc, argv, std::cout, std::cerr); }
