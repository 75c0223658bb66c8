#include <string>
#include <vector>

#include "ellipstab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ellipstab::cli::run(args);
}
