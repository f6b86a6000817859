#include <iostream>

#include "qdent/cli/commands.hpp"

int main(int argc, char** argv) {
    return qdent::cli::run_cli(argc, argv, std::cout, std::cerr);
}
