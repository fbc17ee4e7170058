#include "fica/cli.hpp"

int main(int argc, char** argv) { return fica::run_cli(argc, argv); }
