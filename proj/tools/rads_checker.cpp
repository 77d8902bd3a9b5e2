#include "rads/cli.hpp"

int main(int argc, char** argv) { return rads::run_cli(argc, argv); }
