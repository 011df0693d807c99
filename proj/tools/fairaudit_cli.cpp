#include <iostream>
#include <string>
#include <vector>

#include "fairaudit/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    return fairaudit::cli_main(args, std::cout, std::cerr);
}
