#include <iostream>

#include "ugmae/commands.hpp"

int main(int argc, char** argv) { return ugmae::run_cli(argc, argv, std::cout, std::cerr); }
