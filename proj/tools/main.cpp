#include "cli.hpp"

int main(int argc, char** argv) { return bridgeord::cli::run(argc, argv); }
