#include "cartankit/cli.hpp"

int main(int argc, char** argv) { return cartankit::cli::run(argc, argv); }
