#include "spadgate/cli.hpp"

int main(int argc, char** argv) { return spadgate::run_cli(argc, argv); }
