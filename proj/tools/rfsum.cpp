#include "rfsum/cli.hpp"

int main(int argc, char** argv) { return rfsum::run_cli(argc, argv); }
