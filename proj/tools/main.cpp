#include <iostream>

#include "oocran/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return oocran::run_cli(args, std::cout, std::cerr);
}
