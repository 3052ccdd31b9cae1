#include "bounded/cli.hpp"

int main(int argc, char** argv) { return bounded::run_cli(argc, argv); }
