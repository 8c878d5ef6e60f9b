#include "semoff/cli.hpp"

int main(int argc, char** argv) { return semoff::run_cli(argc, argv); }
