#include "gmind/cli.hpp"

int main(int argc, char **argv) {
    return gmind::cli::main(argc, argv);
}
