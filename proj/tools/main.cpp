#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return mtt::cli::run(argc, argv, std::cout, std::cerr); }
