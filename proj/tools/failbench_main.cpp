#include "failbench/cli.hpp"

int main(int argc, char** argv) { return failbench::cli_dispatch(argc, argv); }
