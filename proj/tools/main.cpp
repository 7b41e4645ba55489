#include <string>
#include <vector>

#include "curbscan/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return curbscan::run_cli(std::move(args));
}
