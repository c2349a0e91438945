#include "tdrl/cli.hpp"

int main(int argc, char** argv) {
    return tdrl::cli(argc, argv);
}
