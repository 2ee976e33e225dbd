#include <iostream>

#include "hsprobe/cli/commands.hpp"

int main(int argc, char** argv) {
    return hsprobe::cli::run(argc, argv, std::cout, std::cerr);
}
