#include "seedgate/cli.hpp"

int main(int argc, char** argv) { return seedgate::cli::cli_dispatch(argc, argv); }
