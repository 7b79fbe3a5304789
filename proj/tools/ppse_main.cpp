#include "ppse/cli.hpp"

int main(int argc, char** argv) { return ppse::run_cli(argc, argv); }
