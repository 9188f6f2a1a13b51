#include <vector>

#include "geosid/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return geosid::cli::run(args);
}
