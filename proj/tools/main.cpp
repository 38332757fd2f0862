#include <iostream>

#include "dsparse/cli.hpp"

int main(int argc, char** argv)
{
    return dsparse::run_cli(argc, argv, std::cout, std::cerr);
}
