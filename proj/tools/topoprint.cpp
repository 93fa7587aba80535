#include "topoprint/cli.hpp"

int main(int argc, char** argv) { return topo::run_cli(argc, argv); }
