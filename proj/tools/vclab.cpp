#include <iostream>

#include "vclab/cli.hpp"

int main(int argc, char** argv) {
    return vclab::run_cli(argc, argv, std::cout, std::cerr);
}
