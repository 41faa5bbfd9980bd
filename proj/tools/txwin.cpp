#include "txwin/cli.hpp"

#include <iostream>

int main(int argc, char **argv)
{
    return txwin::cli::run(argc, argv, std::cout, std::cerr);
}
