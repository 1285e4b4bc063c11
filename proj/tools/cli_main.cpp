#include "compnerf/harness/cli.hpp"

int main(int argc, char** argv) { return compnerf::harness::cli_dispatch(argc, argv); }
