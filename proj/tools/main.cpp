#include "dapm/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return dapm::cli::run(argc, argv, std::cout, std::cerr);
}
