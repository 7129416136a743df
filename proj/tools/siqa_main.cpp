#include "siqa/cli.hpp"

int main(int argc, char** argv) { return siqa::run_cli(argc, argv); }
