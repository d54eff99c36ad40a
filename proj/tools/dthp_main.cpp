#include <string>
#include <vector>

#include "dthp/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return dthp::run_cli(args);
}
