#include "cli.hpp"

int main(int argc, char **argv) { return droplab::cli_dispatch(argc, argv); }
