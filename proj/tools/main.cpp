#include <string>
#include <vector>

#include "blocksplit/cli.hpp"

int main(int argc, char** argv) {
    return blocksplit::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
