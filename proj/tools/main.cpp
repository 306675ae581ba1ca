#include "cfsim/cli.hpp"

int main(int argc, char** argv) { return cfsim::cli_main(argc, argv); }
