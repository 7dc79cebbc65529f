#include "phl/cli.hpp"

int main(int argc, char** argv) { return phl::cli::run(argc, argv); }
