#include "bcscf/cli.hpp"

int main(int argc, char** argv) { return bcscf::run_cli(argc, argv); }
